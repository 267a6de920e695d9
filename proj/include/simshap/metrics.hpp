#pragma once

#include "simshap/estimators.hpp"

#include <Eigen/Dense>

namespace simshap {

// l2 distance between an estimate and a reference attribution.
double l2Bias(const Eigen::Ref<const Eigen::VectorXd>& estimate,
              const Eigen::Ref<const Eigen::VectorXd>& reference);

// Pearson correlation between two attribution vectors; undefined (and an
// error) when either input is constant.
double pearsonConsistency(const Eigen::Ref<const Eigen::VectorXd>& a,
                          const Eigen::Ref<const Eigen::VectorXd>& b);

struct ConvergenceRateReport {
    double fittedRho = 0.0;       // exp(slope) of the log-error fit
    double theoreticalRho = 0.0;  // t * lambda / (alpha + lambda)
    double alpha = 0.0;           // smallest eigenvalue of A off the constraint direction
    double r2 = 0.0;
    bool truncated = false;  // hit the numerical error floor inside the window
};

/**
 * Fits the per-iteration contraction of |beta_n - reference| on the trace
 * (log-linear least squares after burnIn iterations) and sets it against the
 * rate the trace's averaged second moment predicts. alpha is measured in the
 * subspace orthogonal to the all-ones constraint direction, where the
 * iteration actually contracts.
 */
ConvergenceRateReport fitQRate(const IterationTrace& trace,
                               const Eigen::Ref<const Eigen::VectorXd>& reference, int burnIn = 10);

}  // namespace simshap
