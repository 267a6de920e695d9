#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>

namespace simshap {

// Value of the game on the empty and full coalitions. c is the total mass the
// attribution vector must carry: every estimate satisfies sum(beta) = c.
struct GameBoundary {
    double vEmpty = 0.0;
    double vFull = 0.0;

    [[nodiscard]] double c() const { return vFull - vEmpty; }
};

/**
 * Shared knobs for the sampling estimators.
 *
 *   t       momentum in (0, 1); fraction of the previous iterate retained
 *   lambda  l2 regularization on the per-batch update solve
 *   m       coalitions per batch (0: use the 10 * d rule at run time)
 *   epsilon convergence threshold relative to the attribution range
 *   xi      negative-sampling rejection threshold on the variance ratio
 *   batchB  reference mini-batch size for expectation-valued games
 *   maxIterations  hard cap on batches
 *   seed    coalition sampler stream seed
 */
struct EstimatorConfig {
    double t = 0.5;
    double lambda = 0.01;
    int m = 0;
    double epsilon = 0.025;
    double xi = 0.3;
    int batchB = 512;
    int maxIterations = 10000;
    std::uint64_t seed = 0;
    bool pairedSampling = false;
    bool biasCorrection = false;
    bool negativeSamplingGuard = false;

    // Number of coalitions per batch for a d-dimensional game.
    [[nodiscard]] int batchSize(int d) const { return m > 0 ? m : 10 * d; }

    void validate() const {
        if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("EstimatorConfig: t must lie in (0, 1)");
        if (lambda < 0.0) throw std::invalid_argument("EstimatorConfig: lambda must be non-negative");
        if (m < 0) throw std::invalid_argument("EstimatorConfig: m must be positive (or 0 for the default rule)");
        if (!(epsilon > 0.0)) throw std::invalid_argument("EstimatorConfig: epsilon must be positive");
        if (!(xi > 0.0)) throw std::invalid_argument("EstimatorConfig: xi must be positive");
        if (batchB < 1) throw std::invalid_argument("EstimatorConfig: batchB must be positive");
        if (maxIterations < 1) throw std::invalid_argument("EstimatorConfig: maxIterations must be positive");
        if (pairedSampling && m > 0 && m % 2 != 0)
            throw std::invalid_argument("EstimatorConfig: paired sampling needs an even m");
    }
};

// Snapshot of an estimator's state: current attribution plus the streaming
// first/second moments over the iterate history that drive the stopping rule.
struct AttributionEstimate {
    Eigen::VectorXd beta;
    long iteration = 0;
    Eigen::VectorXd runningMean;
    Eigen::VectorXd runningM2;
    bool converged = false;
};

}  // namespace simshap
