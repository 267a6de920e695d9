#pragma once

#include "simshap/coalition.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace simshap {

/**
 * Weighted second moments of a coalition batch against game values:
 *
 *   A    = sum_i w_i z_i z_i^T          (weights normalized to sum 1)
 *   bbar = sum_i w_i z_i (v_i - v0)
 *
 * abar() adds the l2 term. These are the sufficient statistics for every
 * least-squares step in the library.
 */
struct BatchMoments {
    Eigen::MatrixXd A;
    Eigen::VectorXd bbar;
    double lambda = 0.0;

    [[nodiscard]] Eigen::MatrixXd abar() const {
        return A + lambda * Eigen::MatrixXd::Identity(A.rows(), A.cols());
    }
};

// Stacks coalition indicators into an m x d design matrix.
inline Eigen::MatrixXd coalitionMatrix(const std::vector<Coalition>& batch) {
    if (batch.empty()) throw std::invalid_argument("coalitionMatrix: empty batch");
    const int d = batch.front().dimension();
    Eigen::MatrixXd Z(static_cast<Eigen::Index>(batch.size()), d);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch[i].dimension() != d)
            throw std::invalid_argument("coalitionMatrix: mixed coalition dimensions");
        Z.row(static_cast<Eigen::Index>(i)) = batch[i].indicator().transpose();
    }
    return Z;
}

inline BatchMoments buildMoments(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                                 const Eigen::Ref<const Eigen::VectorXd>& values,
                                 const Eigen::Ref<const Eigen::VectorXd>& weights, double vEmpty,
                                 double lambda) {
    if (Z.rows() != values.size() || Z.rows() != weights.size())
        throw std::invalid_argument("buildMoments: row count mismatch");
    const double total = weights.sum();
    if (!(total > 0.0)) throw std::invalid_argument("buildMoments: weights must have positive mass");
    const Eigen::VectorXd w = weights / total;
    BatchMoments moments;
    moments.A = Z.transpose() * w.asDiagonal() * Z;
    moments.bbar = Z.transpose() * (w.array() * (values.array() - vEmpty)).matrix();
    moments.lambda = lambda;
    return moments;
}

}  // namespace simshap
