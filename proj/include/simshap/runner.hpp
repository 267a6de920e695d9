#pragma once

#include "simshap/config.hpp"
#include "simshap/dataset.hpp"
#include "simshap/estimators.hpp"
#include "simshap/game.hpp"
#include "simshap/metrics.hpp"
#include "simshap/report.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace simshap {

enum class Command { ExplainLocal, ExplainGlobal, Exact, Bench, RateStudy };
enum class GameSpecKind { Loss, Prediction, Table };
enum class EstimatorKind { Sim, StableSim, KernelShap, Exact };

// Where the predictive model comes from: fitted here or loaded from JSON.
struct ModelSpec {
    enum class Source { FitLinear, FitLogistic, File } source = Source::FitLinear;
    std::string path;
    double ridge = 1e-6;
};

// Sizes for the disjoint background/reference selections; 0 means default
// (background: min(512, train size); reference: the whole reference pool).
struct SplitSpec {
    int backgroundSize = 0;
    int referenceSize = 0;
};

/**
 * Everything one invocation needs. The root seed fans out into fixed
 * sub-streams so the same seed reproduces the run bit for bit: seed^1 shuffles
 * the split, seed^2 drives the coalition sampler, seed^3 the reference
 * mini-batches, seed^4 a reference estimator.
 */
struct RunSpec {
    Command command = Command::ExplainLocal;
    std::string dataPath;
    std::string labelColumn;
    GameSpecKind game = GameSpecKind::Loss;
    LossKind loss = LossKind::SquaredError;
    ImputerKind imputer = ImputerKind::MarginalBackground;
    ModelSpec model;
    EstimatorKind estimator = EstimatorKind::Sim;
    EstimatorConfig config;
    SplitSpec split;
    std::uint64_t seed = 0;
    int instanceIndex = 0;
    int positiveClass = 1;
    std::string referenceEstimator;  // "", "exact", or "kernelshap"
    std::vector<long> budgetGrid;
    std::vector<EstimatorKind> benchMethods;
    int reps = 100;
    int rateBurnIn = 1;
    std::string outputPath;
    std::string tracePath;
    std::string plotPath;
};

struct RunOutput {
    ExplanationResult result;
    nlohmann::json report;
    std::vector<BenchRow> bench;
    std::optional<ConvergenceRateReport> rate;
    GameBoundary boundary;
    std::vector<std::string> featureNames;
};

// Runs one spec end to end, writing the requested report/trace/plot files.
RunOutput executeRun(const RunSpec& spec);

// The explain commands as a direct call (command must be an explain/exact).
RunOutput runExplain(const RunSpec& spec);

// Budget-grid benchmark over methods; ground truth is the exact oracle when
// the dimension is enumerable, otherwise a tight-threshold baseline run.
std::vector<BenchRow> runBench(CooperativeGame& game, const Eigen::VectorXd& groundTruth,
                               const std::vector<EstimatorKind>& methods,
                               const std::vector<long>& budgets, int reps,
                               const EstimatorConfig& base);

const char* estimatorName(EstimatorKind kind);

}  // namespace simshap
