#pragma once

#include "simshap/errors.hpp"
#include "simshap/moments.hpp"

#include <Eigen/Dense>

#include <string>

namespace simshap {

/**
 * Minimizer of  beta^T Abar beta - 2 q^T beta  subject to  1^T beta = c,
 * with Abar = A + lambda I:
 *
 *   beta = Abar^{-1} [ q + 1 (c - 1^T Abar^{-1} q) / (1^T Abar^{-1} 1) ]
 *
 * computed from one Cholesky factorization and triangular solves; the
 * inverse is never formed. A rank-deficient Abar (lambda = 0 with a
 * deficient A) raises SingularSystem; this routine never regularizes on
 * its own.
 */
class ConstrainedRidgeSolver {
public:
    explicit ConstrainedRidgeSolver(const BatchMoments& moments) : llt_(moments.abar()) {
        const auto d = moments.A.rows();
        if (llt_.info() != Eigen::Success || llt_.rcond() < 1e-14)
            throw SingularSystem(
                "ConstrainedRidgeSolver: A + lambda I is singular (lambda = " +
                std::to_string(moments.lambda) + ", d = " + std::to_string(d) + ")");
        onesSolve_ = llt_.solve(Eigen::VectorXd::Ones(d));
        onesQuad_ = onesSolve_.sum();
        if (!(onesQuad_ > 0.0))
            throw SingularSystem("ConstrainedRidgeSolver: constraint direction is degenerate");
    }

    [[nodiscard]] Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& q, double c) const {
        const Eigen::VectorXd u = llt_.solve(q);
        return u + onesSolve_ * ((c - u.sum()) / onesQuad_);
    }

private:
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd onesSolve_;
    double onesQuad_ = 0.0;
};

inline Eigen::VectorXd solveConstrainedRidge(const BatchMoments& moments,
                                             const Eigen::Ref<const Eigen::VectorXd>& q, double c) {
    return ConstrainedRidgeSolver(moments).solve(q, c);
}

}  // namespace simshap
