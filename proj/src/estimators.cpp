#include "simshap/estimators.hpp"

#include "simshap/errors.hpp"
#include "simshap/solver.hpp"
#include "simshap/welford.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <thread>

namespace simshap {

namespace {

std::atomic<int> gEvaluationThreads{0};

int resolvedThreads() {
    const int requested = gEvaluationThreads.load();
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1U, 8U));
}

double elapsedMillis(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

// Evaluates the whole batch; values land at their coalition's index, so the
// result is identical however many workers ran.
Eigen::VectorXd evaluateBatch(const CooperativeGame& game, const std::vector<Coalition>& batch) {
    const auto m = static_cast<Eigen::Index>(batch.size());
    Eigen::VectorXd values(m);
    const int threads = resolvedThreads();
    if (!game.costlyEvaluation() || threads < 2 || m < 2 * threads) {
        for (Eigen::Index i = 0; i < m; ++i) values[i] = game.value(batch[i]);
        return values;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::atomic<Eigen::Index> cursor{0};
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const Eigen::Index i = cursor.fetch_add(1);
                if (i >= m) return;
                values[i] = game.value(batch[i]);
            }
        });
    }
    for (auto& worker : pool) worker.join();
    return values;
}

struct StopState {
    double maxSigma = std::numeric_limits<double>::quiet_NaN();
    double range = std::numeric_limits<double>::quiet_NaN();
    bool stop = false;
};

// Convergence rule: every coordinate's standard error of the mean iterate,
// sqrt(Var_n / n), must fall below epsilon times the attribution range. A
// collapsed range falls back to the scale |c| / d so the comparison stays
// meaningful.
StopState checkStop(const WelfordAccumulator& iterates, const Eigen::VectorXd& beta,
                    double epsilon, double c) {
    StopState state;
    if (iterates.count() < 2) return state;
    const double n = static_cast<double>(iterates.count());
    state.maxSigma = std::sqrt(iterates.variance().maxCoeff() / n);
    state.range = beta.maxCoeff() - beta.minCoeff();
    double scale = state.range;
    if (scale < 1e-12) scale = std::max(1e-12, std::abs(c) / static_cast<double>(beta.size()));
    state.stop = iterates.count() >= 3 && state.maxSigma < epsilon * scale;
    return state;
}

}  // namespace

void setEvaluationThreads(int threads) {
    if (threads < 0) throw std::invalid_argument("setEvaluationThreads: negative thread count");
    gEvaluationThreads.store(threads);
}

int evaluationThreads() { return resolvedThreads(); }

SamplerBatchSource::SamplerBatchSource(int d, int m, std::uint64_t seed, bool paired)
    : m_(m), sampler_(d, seed, paired) {
    if (m < 1) throw std::invalid_argument("SamplerBatchSource: batch size must be positive");
}

Batch SamplerBatchSource::next() {
    Batch batch;
    batch.coalitions = sampler_.sampleBatch(m_);
    batch.weights = Eigen::VectorXd::Constant(m_, 1.0 / static_cast<double>(m_));
    return batch;
}

EnumerationBatchSource::EnumerationBatchSource(int d) {
    if (d < 2 || d > kEnumerationCap)
        throw std::invalid_argument("EnumerationBatchSource: dimension outside enumeration range");
    const std::uint64_t full = std::uint64_t{1} << d;
    double total = 0.0;
    batch_.coalitions.reserve(full - 2);
    std::vector<double> weights;
    weights.reserve(full - 2);
    for (std::uint64_t idx = 1; idx + 1 < full; ++idx) {
        Coalition z = Coalition::fromIndex(idx, d);
        const double w = shapleyKernelWeight(d, z.size());
        batch_.coalitions.push_back(std::move(z));
        weights.push_back(w);
        total += w;
    }
    batch_.weights =
        Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size())) /
        total;
}

ExplanationResult exactShapley(CooperativeGame& game) {
    const int d = game.dimension();
    if (d < 1 || d > kEnumerationCap)
        throw std::invalid_argument("exactShapley: dimension outside enumeration range");
    const auto start = std::chrono::steady_clock::now();

    game.nextIteration();
    const std::uint64_t full = std::uint64_t{1} << d;
    std::vector<double> table(full);
    for (std::uint64_t idx = 0; idx < full; ++idx)
        table[idx] = game.value(Coalition::fromIndex(idx, d));

    // Marginal-contribution weight of a context of size s: 1 / (d * C(d-1, s)).
    std::vector<double> weight(d);
    for (int s = 0; s < d; ++s) weight[s] = std::exp(-std::log(double(d)) - logBinomial(d - 1, s));

    Eigen::VectorXd phi = Eigen::VectorXd::Zero(d);
    for (std::uint64_t idx = 0; idx < full; ++idx) {
        const int s = std::popcount(idx);
        for (int i = 0; i < d; ++i) {
            const std::uint64_t bit = std::uint64_t{1} << i;
            if (idx & bit) continue;
            phi[i] += weight[s] * (table[idx | bit] - table[idx]);
        }
    }

    ExplanationResult result;
    result.method = "exact";
    result.estimate.beta = phi;
    result.estimate.iteration = 1;
    result.estimate.runningMean = phi;
    result.estimate.runningM2 = Eigen::VectorXd::Zero(d);
    result.estimate.converged = true;
    result.gameEvaluations = static_cast<long>(full);
    result.wallMillis = elapsedMillis(start);
    return result;
}

ExplanationResult runMomentumIteration(CooperativeGame& game, const EstimatorConfig& config,
                                       BatchSource& source, bool withTrace) {
    config.validate();
    if (!(config.lambda > 0.0))
        throw std::invalid_argument("runMomentumIteration: momentum iteration needs lambda > 0");
    const int d = game.dimension();
    const double c = game.boundary().c();
    const double v0 = game.boundary().vEmpty;
    const double t = config.t;
    const auto start = std::chrono::steady_clock::now();

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(d);
    WelfordAccumulator iterates(d);  // accepted beta stream, drives the stopping rule
    WelfordAccumulator updates(d);   // accepted delta stream, drives the guard

    ExplanationResult result;
    result.method = config.biasCorrection
                        ? (config.negativeSamplingGuard ? "stable-sim" : "sim-corrected")
                        : "sim";
    result.trace.t = t;
    result.trace.lambda = config.lambda;
    result.trace.meanA = Eigen::MatrixXd::Zero(d, d);
    long accepted = 0;

    for (long n = 1; n <= config.maxIterations; ++n) {
        game.nextIteration();
        const Batch batch = source.next();
        const Eigen::VectorXd values = evaluateBatch(game, batch.coalitions);
        result.gameEvaluations += source.batchCost();

        const Eigen::MatrixXd Z = coalitionMatrix(batch.coalitions);
        const BatchMoments moments = buildMoments(Z, values, batch.weights, v0, config.lambda);

        // Momentum coefficients for update n; with bias correction the
        // divisor 1 - t^n removes the zero-start shrinkage, making the first
        // iterate equal its own update.
        const double divisor = config.biasCorrection ? 1.0 - std::pow(t, double(n)) : 1.0;
        const double c1 = t / divisor;
        const double c2 = (1.0 - t) / divisor;

        const Eigen::VectorXd q = moments.bbar - c1 * (moments.A * beta);
        const double cResidual = c - c1 * beta.sum();
        const Eigen::VectorXd deltaCandidate =
            solveConstrainedRidge(moments, q, cResidual) / c2;
        const Eigen::VectorXd betaCandidate = c1 * beta + c2 * deltaCandidate;
        if (!betaCandidate.allFinite() || !deltaCandidate.allFinite())
            throw NumericalError("momentum iteration diverged at iteration " + std::to_string(n) +
                                 " (d = " + std::to_string(d) + ")");

        // Negative-sampling guard: probe the update stream's variance with
        // the candidate and set it against the iterate stream's, both taken
        // before this round lands. Past the threshold the carried iterate and
        // update revert to their previous values (a rollback exactly one
        // iterate wide); the stopping statistic still absorbs the candidate,
        // so a run keeps winding down even through rejected rounds.
        double guardRatio = std::numeric_limits<double>::quiet_NaN();
        bool rejected = false;
        if (config.negativeSamplingGuard && iterates.count() >= 2 && updates.count() >= 2) {
            const double iterateNorm = iterates.variance().norm();
            if (iterateNorm > 0.0) {
                const double updateNorm = updates.varianceWith(deltaCandidate).norm();
                guardRatio = (updateNorm - iterateNorm) / iterateNorm;
                rejected = guardRatio > config.xi;
            }
        }

        iterates.update(betaCandidate);
        if (rejected) {
            updates.update(delta);  // the retained update, not the rejected one
        } else {
            beta = betaCandidate;
            delta = deltaCandidate;
            updates.update(delta);
            ++accepted;
            result.trace.meanA += (moments.A - result.trace.meanA) / static_cast<double>(accepted);
        }
        const StopState stop = checkStop(iterates, beta, config.epsilon, c);

        if (withTrace) {
            TraceRecord rec;
            rec.n = n;
            rec.beta = beta;            // the carried iterate, after any rollback
            rec.delta = deltaCandidate; // what this round's batch produced
            rec.maxSigma = stop.maxSigma;
            rec.range = stop.range;
            rec.guardRatio = guardRatio;
            rec.flagged = rejected;
            rec.evaluations = result.gameEvaluations;
            rec.millis = elapsedMillis(start);
            result.trace.records.push_back(std::move(rec));
        }

        result.estimate.iteration = n;
        result.maxSigma = stop.maxSigma;
        result.range = stop.range;
        if (stop.stop) {
            result.estimate.converged = true;
            break;
        }
    }

    result.estimate.beta = beta;
    if (accepted > 0) result.estimate.runningMean = iterates.mean();
    result.estimate.runningM2 = iterates.sumSquaredDeviations();
    result.wallMillis = elapsedMillis(start);
    return result;
}

ExplanationResult simShapley(CooperativeGame& game, const EstimatorConfig& config, bool withTrace) {
    SamplerBatchSource source(game.dimension(), config.batchSize(game.dimension()), config.seed,
                              config.pairedSampling);
    return runMomentumIteration(game, config, source, withTrace);
}

ExplanationResult stableSimShapley(CooperativeGame& game, const EstimatorConfig& config,
                                   bool withTrace) {
    EstimatorConfig stable = config;
    stable.biasCorrection = true;
    stable.negativeSamplingGuard = true;
    return simShapley(game, stable, withTrace);
}

namespace {

// Constrained least-squares solve with lambda = 0; a reported singular
// system is retried once with a 1e-10 jitter so a degenerate batch still
// yields a (flagged) estimate.
Eigen::VectorXd solveBaseline(BatchMoments moments, double c, bool& jitterApplied) {
    moments.lambda = 0.0;
    try {
        return solveConstrainedRidge(moments, moments.bbar, c);
    } catch (const SingularSystem&) {
        jitterApplied = true;
        moments.lambda = 1e-10;
        return solveConstrainedRidge(moments, moments.bbar, c);
    }
}

}  // namespace

ExplanationResult kernelShap(CooperativeGame& game, const EstimatorConfig& config,
                             bool untilConverged, bool withTrace) {
    config.validate();
    const int d = game.dimension();
    const double c = game.boundary().c();
    const double v0 = game.boundary().vEmpty;
    const int m = config.batchSize(d);
    const auto start = std::chrono::steady_clock::now();

    KernelSampler sampler(d, config.seed, config.pairedSampling);
    Eigen::MatrixXd sumA = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd sumB = Eigen::VectorXd::Zero(d);
    long samples = 0;
    WelfordAccumulator solutions(d);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);

    ExplanationResult result;
    result.method = "kernelshap";
    result.trace.t = 0.0;
    result.trace.lambda = 0.0;
    result.trace.meanA = Eigen::MatrixXd::Zero(d, d);

    const long rounds = untilConverged ? config.maxIterations : 1;
    for (long n = 1; n <= rounds; ++n) {
        game.nextIteration();
        const std::vector<Coalition> batch = sampler.sampleBatch(m);
        const Eigen::VectorXd values = evaluateBatch(game, batch);
        result.gameEvaluations += m;

        const Eigen::MatrixXd Z = coalitionMatrix(batch);
        sumA.noalias() += Z.transpose() * Z;
        sumB.noalias() += Z.transpose() * (values.array() - v0).matrix();
        samples += m;

        BatchMoments moments;
        moments.A = sumA / static_cast<double>(samples);
        moments.bbar = sumB / static_cast<double>(samples);
        beta = solveBaseline(moments, c, result.jitterApplied);
        if (!beta.allFinite())
            throw NumericalError("kernelShap solution diverged at round " + std::to_string(n));
        solutions.update(beta);
        result.trace.meanA = moments.A;

        const StopState stop = checkStop(solutions, beta, config.epsilon, c);
        if (withTrace) {
            TraceRecord rec;
            rec.n = n;
            rec.beta = beta;
            rec.delta = beta;
            rec.maxSigma = stop.maxSigma;
            rec.range = stop.range;
            rec.evaluations = result.gameEvaluations;
            rec.millis = elapsedMillis(start);
            result.trace.records.push_back(std::move(rec));
        }
        result.estimate.iteration = n;
        result.maxSigma = stop.maxSigma;
        result.range = stop.range;
        if (untilConverged && stop.stop) {
            result.estimate.converged = true;
            break;
        }
    }

    result.estimate.beta = beta;
    result.estimate.runningMean = solutions.mean();
    result.estimate.runningM2 = solutions.sumSquaredDeviations();
    result.wallMillis = elapsedMillis(start);
    return result;
}

ExplanationResult kernelShapEnumerated(CooperativeGame& game) {
    const int d = game.dimension();
    const auto start = std::chrono::steady_clock::now();
    game.nextIteration();
    EnumerationBatchSource source(d);
    const Batch batch = source.next();
    const Eigen::VectorXd values = evaluateBatch(game, batch.coalitions);

    const Eigen::MatrixXd Z = coalitionMatrix(batch.coalitions);
    BatchMoments moments =
        buildMoments(Z, values, batch.weights, game.boundary().vEmpty, 0.0);

    ExplanationResult result;
    result.method = "kernelshap-enumerated";
    result.estimate.beta = solveConstrainedRidge(moments, moments.bbar, game.boundary().c());
    result.estimate.iteration = 1;
    result.estimate.converged = true;
    result.estimate.runningMean = result.estimate.beta;
    result.estimate.runningM2 = Eigen::VectorXd::Zero(d);
    result.gameEvaluations = source.batchCost();
    result.trace.meanA = moments.A;
    result.wallMillis = elapsedMillis(start);
    return result;
}

}  // namespace simshap
