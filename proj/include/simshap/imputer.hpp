#pragma once

#include "simshap/coalition.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <utility>

namespace simshap {

// Rows of observed data used to fill in features a coalition hides.
struct BackgroundSet {
    Eigen::MatrixXd rows;

    explicit BackgroundSet(Eigen::MatrixXd data) : rows(std::move(data)) {
        if (rows.rows() < 1) throw std::invalid_argument("BackgroundSet: need at least one row");
    }

    [[nodiscard]] Eigen::Index size() const { return rows.rows(); }
    [[nodiscard]] Eigen::Index dimension() const { return rows.cols(); }
};

enum class ImputerKind { MarginalBackground, Mean };

/**
 * Completes a partially observed instance. For a coalition z the features
 * with z_i = 1 keep the instance's values; the rest are filled in either
 * from every background row in turn (marginal-background: one completion
 * per row, so downstream averages approximate the marginal expectation) or
 * from the background column means (mean: a single completion).
 */
class Imputer {
public:
    Imputer(ImputerKind kind, BackgroundSet background)
        : kind_(kind), background_(std::move(background)),
          columnMeans_(background_.rows.colwise().mean()) {}

    [[nodiscard]] ImputerKind kind() const { return kind_; }
    [[nodiscard]] Eigen::Index dimension() const { return background_.dimension(); }
    [[nodiscard]] const Eigen::VectorXd& columnMeans() const { return columnMeans_; }

    [[nodiscard]] Eigen::MatrixXd complete(const Eigen::Ref<const Eigen::VectorXd>& x,
                                           const Coalition& z) const {
        if (x.size() != background_.dimension())
            throw std::invalid_argument("Imputer: instance dimension does not match background");
        if (z.dimension() != background_.dimension())
            throw std::invalid_argument("Imputer: coalition dimension does not match background");
        if (kind_ == ImputerKind::MarginalBackground) {
            Eigen::MatrixXd out = background_.rows;
            for (int i = 0; i < z.dimension(); ++i)
                if (z.contains(i)) out.col(i).setConstant(x[i]);
            return out;
        }
        Eigen::MatrixXd out(1, background_.dimension());
        out.row(0) = columnMeans_.transpose();
        for (int i = 0; i < z.dimension(); ++i)
            if (z.contains(i)) out(0, i) = x[i];
        return out;
    }

private:
    ImputerKind kind_;
    BackgroundSet background_;
    Eigen::VectorXd columnMeans_;
};

}  // namespace simshap
