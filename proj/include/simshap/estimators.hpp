#pragma once

#include "simshap/coalition.hpp"
#include "simshap/config.hpp"
#include "simshap/game.hpp"
#include "simshap/moments.hpp"
#include "simshap/sampler.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace simshap {

// One coalition batch with normalized sampling weights.
struct Batch {
    std::vector<Coalition> coalitions;
    Eigen::VectorXd weights;
};

/**
 * Supplies one coalition batch per estimator iteration. The stochastic
 * source draws from the kernel sampler; the enumeration source returns every
 * admissible coalition with its kernel weight, the deterministic limit used
 * by fixed-point and rate analyses. Tests may substitute their own source to
 * inject constructed batches.
 */
class BatchSource {
public:
    virtual ~BatchSource() = default;
    virtual Batch next() = 0;
    // Game evaluations one batch costs.
    [[nodiscard]] virtual long batchCost() const = 0;
};

class SamplerBatchSource final : public BatchSource {
public:
    SamplerBatchSource(int d, int m, std::uint64_t seed, bool paired);
    Batch next() override;
    [[nodiscard]] long batchCost() const override { return m_; }

private:
    int m_;
    KernelSampler sampler_;
};

class EnumerationBatchSource final : public BatchSource {
public:
    explicit EnumerationBatchSource(int d);
    Batch next() override { return batch_; }
    [[nodiscard]] long batchCost() const override {
        return static_cast<long>(batch_.coalitions.size());
    }

private:
    Batch batch_;
};

struct TraceRecord {
    long n = 0;
    Eigen::VectorXd beta;
    Eigen::VectorXd delta;
    double maxSigma = std::numeric_limits<double>::quiet_NaN();
    double range = std::numeric_limits<double>::quiet_NaN();
    double guardRatio = std::numeric_limits<double>::quiet_NaN();
    bool flagged = false;
    long evaluations = 0;
    double millis = 0.0;
};

struct IterationTrace {
    std::vector<TraceRecord> records;
    Eigen::MatrixXd meanA;  // second moment averaged over accepted batches
    double t = 0.0;
    double lambda = 0.0;
};

struct ExplanationResult {
    std::string method;
    AttributionEstimate estimate;
    IterationTrace trace;
    long gameEvaluations = 0;
    double maxSigma = std::numeric_limits<double>::quiet_NaN();
    double range = std::numeric_limits<double>::quiet_NaN();
    bool jitterApplied = false;
    double wallMillis = 0.0;
};

// Worker pool width for batch game evaluation (games that report costly
// evaluations are spread over this many threads; order of accumulation is
// fixed by coalition index either way). 0 restores the hardware default.
void setEvaluationThreads(int threads);
int evaluationThreads();

/**
 * Exact attribution by full enumeration: each of the 2^d coalition values is
 * evaluated exactly once, then combined with the combinatorial weights
 * 1 / (d * C(d-1, |S|)). Only defined up to the enumeration cap.
 */
ExplanationResult exactShapley(CooperativeGame& game);

/**
 * Constrained weighted least squares on sampled coalitions (the classical
 * baseline). In single-batch form one batch of m coalitions is solved once
 * with lambda = 0 (a reported singular system is retried once with a 1e-10
 * jitter). With untilConverged, fresh batches accumulate into the moments
 * and the re-solved estimate stops under the same variance criterion the
 * momentum estimators use.
 */
ExplanationResult kernelShap(CooperativeGame& game, const EstimatorConfig& config,
                             bool untilConverged = false, bool withTrace = false);

// Weighted least squares over the full admissible enumeration; the
// deterministic limit of kernelShap.
ExplanationResult kernelShapEnumerated(CooperativeGame& game);

/**
 * Momentum iteration over stochastic batches: per batch, an l2-regularized
 * constrained solve yields the update delta, folded into the iterate by an
 * exponential moving average; the streaming variance of the iterates drives
 * the stopping rule. Honors config.biasCorrection (divisor 1 - t^n) and
 * config.negativeSamplingGuard (variance-ratio batch rejection).
 */
ExplanationResult simShapley(CooperativeGame& game, const EstimatorConfig& config,
                             bool withTrace = false);

// simShapley with bias correction and the negative-sampling guard forced on.
ExplanationResult stableSimShapley(CooperativeGame& game, const EstimatorConfig& config,
                                   bool withTrace = false);

// The iteration engine behind simShapley/stableSimShapley, exposed so callers
// can supply their own batch source (deterministic enumeration, constructed
// batches in tests).
ExplanationResult runMomentumIteration(CooperativeGame& game, const EstimatorConfig& config,
                                       BatchSource& source, bool withTrace);

}  // namespace simshap
