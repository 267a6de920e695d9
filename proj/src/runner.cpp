#include "simshap/runner.hpp"

#include "simshap/errors.hpp"
#include "simshap/rng.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <memory>

namespace simshap {

namespace {

struct GameContext {
    std::unique_ptr<CooperativeGame> game;
    std::vector<std::string> featureNames;
};

std::shared_ptr<const PredictiveModel> buildModel(const RunSpec& spec,
                                                  const Eigen::MatrixXd& trainX,
                                                  const Eigen::VectorXd& trainY) {
    switch (spec.model.source) {
        case ModelSpec::Source::File:
            return std::make_shared<const PredictiveModel>(loadModel(spec.model.path));
        case ModelSpec::Source::FitLogistic:
            return std::make_shared<const PredictiveModel>(fitLogistic(trainX, trainY, 1e-4));
        case ModelSpec::Source::FitLinear:
        default:
            return std::make_shared<const PredictiveModel>(fitLinear(trainX, trainY, spec.model.ridge));
    }
}

GameContext buildGame(const RunSpec& spec) {
    GameContext ctx;
    if (spec.game == GameSpecKind::Table) {
        ctx.game = tabulatedGameFromFile(spec.dataPath);
        for (int i = 0; i < ctx.game->dimension(); ++i)
            ctx.featureNames.push_back("f" + std::to_string(i));
        return ctx;
    }

    if (spec.labelColumn.empty())
        throw InputError("this game needs --label-col to name the label column");
    const Dataset data = ingestCsv(spec.dataPath, spec.labelColumn);
    const DataSplits splits = splitRows(data.rows(), spec.seed ^ 1ULL);
    ctx.featureNames = data.featureNames;

    const Eigen::MatrixXd trainX = selectRows(data.X, splits.train);
    const Eigen::VectorXd trainY = selectRows(data.y, splits.train);
    const auto model = buildModel(spec, trainX, trainY);
    if (model->weights.size() != data.features())
        throw InputError("model has " + std::to_string(model->weights.size()) +
                         " weights but the data has " + std::to_string(data.features()) +
                         " features");

    long bgSize = spec.split.backgroundSize > 0 ? spec.split.backgroundSize : 512;
    bgSize = std::min<long>(bgSize, static_cast<long>(splits.train.size()));
    const std::vector<Eigen::Index> bgIdx(splits.train.begin(), splits.train.begin() + bgSize);
    const auto imputer = std::make_shared<const Imputer>(
        spec.imputer, BackgroundSet(selectRows(data.X, bgIdx)));

    const auto makeLocal = [&, model, imputer](const LocalInstance& inst) {
        return spec.game == GameSpecKind::Loss
                   ? lossGameLocal(model, imputer, inst, spec.loss)
                   : predictionGameLocal(model, imputer, inst, spec.positiveClass);
    };

    if (spec.command == Command::ExplainGlobal) {
        long refSize = spec.split.referenceSize > 0 ? spec.split.referenceSize
                                                    : static_cast<long>(splits.referencePool.size());
        refSize = std::min<long>(refSize, static_cast<long>(splits.referencePool.size()));
        if (refSize < 1) throw InputError("reference pool is empty");
        const std::vector<Eigen::Index> refIdx(splits.referencePool.begin(),
                                               splits.referencePool.begin() + refSize);
        const ReferenceSet reference(selectRows(data.X, refIdx), selectRows(data.y, refIdx));
        const int B = std::min<int>(spec.config.batchB, static_cast<int>(reference.size()));
        ctx.game = globalGame(makeLocal, reference, B, spec.seed ^ 3ULL);
        return ctx;
    }

    if (spec.instanceIndex < 0 ||
        spec.instanceIndex >= static_cast<int>(splits.test.size()))
        throw InputError("--instance-index " + std::to_string(spec.instanceIndex) +
                         " is outside the test split (size " + std::to_string(splits.test.size()) +
                         ")");
    const Eigen::Index row = splits.test[spec.instanceIndex];
    ctx.game = makeLocal({data.X.row(row).transpose(), data.y[row]});
    return ctx;
}

ExplanationResult dispatchEstimator(CooperativeGame& game, EstimatorKind kind,
                                    const EstimatorConfig& config, bool withTrace) {
    switch (kind) {
        case EstimatorKind::Exact:
            return exactShapley(game);
        case EstimatorKind::KernelShap:
            return kernelShap(game, config, /*untilConverged=*/true, withTrace);
        case EstimatorKind::StableSim:
            return stableSimShapley(game, config, withTrace);
        case EstimatorKind::Sim:
        default:
            return simShapley(game, config, withTrace);
    }
}

std::optional<ReferenceComparison> compareAgainstReference(const RunSpec& spec,
                                                           CooperativeGame& game,
                                                           const Eigen::VectorXd& attributions) {
    if (spec.referenceEstimator.empty()) return std::nullopt;
    ReferenceComparison cmp;
    cmp.method = spec.referenceEstimator;
    if (spec.referenceEstimator == "exact") {
        cmp.attributions = exactShapley(game).estimate.beta;
    } else if (spec.referenceEstimator == "kernelshap") {
        EstimatorConfig tight = spec.config;
        tight.seed = spec.seed ^ 4ULL;
        tight.epsilon = spec.config.epsilon / 5.0;
        cmp.attributions = kernelShap(game, tight, /*untilConverged=*/true).estimate.beta;
    } else {
        throw InputError("unknown reference estimator '" + spec.referenceEstimator + "'");
    }
    cmp.bias = l2Bias(attributions, cmp.attributions);
    cmp.consistency = pearsonConsistency(attributions, cmp.attributions);
    return cmp;
}

const char* gameKindName(GameSpecKind kind) {
    switch (kind) {
        case GameSpecKind::Loss: return "loss";
        case GameSpecKind::Prediction: return "prediction";
        case GameSpecKind::Table: return "table";
    }
    return "?";
}

void writeOutputs(const RunSpec& spec, RunOutput& out, int d) {
    if (!spec.outputPath.empty()) writeReport(out.report, spec.outputPath);
    if (!spec.tracePath.empty()) writeTraceCsv(out.result.trace, d, spec.tracePath);
    if (!spec.plotPath.empty()) {
        std::ofstream plot(spec.plotPath);
        if (!plot) throw InputError("cannot open " + spec.plotPath);
        std::optional<Eigen::VectorXd> ref;
        if (out.report.contains("reference") && !out.report["reference"].is_null()) {
            const auto vals = out.report["reference"]["attributions"].get<std::vector<double>>();
            ref = Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                                    static_cast<Eigen::Index>(vals.size()));
        }
        emitPlotData(out.result, ref, plot);
    }
}

}  // namespace

const char* estimatorName(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Sim: return "sim";
        case EstimatorKind::StableSim: return "stable-sim";
        case EstimatorKind::KernelShap: return "kernelshap";
        case EstimatorKind::Exact: return "exact";
    }
    return "?";
}

RunOutput runExplain(const RunSpec& spec) {
    GameContext ctx = buildGame(spec);
    EstimatorConfig config = spec.config;
    config.seed = spec.seed ^ 2ULL;

    const EstimatorKind kind =
        spec.command == Command::Exact ? EstimatorKind::Exact : spec.estimator;
    const bool withTrace = !spec.tracePath.empty() || !spec.plotPath.empty();

    RunOutput out;
    out.result = dispatchEstimator(*ctx.game, kind, config, withTrace);
    out.boundary = ctx.game->boundary();
    out.featureNames = ctx.featureNames;
    const auto reference = compareAgainstReference(spec, *ctx.game, out.result.estimate.beta);
    out.report = reportJson(out.result, config, out.boundary, gameKindName(spec.game),
                            ctx.featureNames, reference);
    writeOutputs(spec, out, ctx.game->dimension());
    return out;
}

std::vector<BenchRow> runBench(CooperativeGame& game, const Eigen::VectorXd& groundTruth,
                               const std::vector<EstimatorKind>& methods,
                               const std::vector<long>& budgets, int reps,
                               const EstimatorConfig& base) {
    if (methods.empty()) throw InputError("runBench: no methods requested");
    if (budgets.empty()) throw InputError("runBench: empty budget grid");
    if (reps < 1) throw InputError("runBench: reps must be positive");
    for (const EstimatorKind method : methods)
        if (method == EstimatorKind::Exact)
            throw InputError("runBench: exact has no sampling budget; remove it from the grid");

    const int d = game.dimension();
    std::vector<BenchRow> table;
    for (const EstimatorKind method : methods) {
        for (const long budget : budgets) {
            double biasSum = 0.0;
            double millisSum = 0.0;
            for (int rep = 0; rep < reps; ++rep) {
                EstimatorConfig cfg = base;
                std::uint64_t mix = base.seed ^ (static_cast<std::uint64_t>(budget) * 0x9E3779B97F4A7C15ULL) ^
                                    (static_cast<std::uint64_t>(method) + 1) * 0xBF58476D1CE4E5B9ULL;
                mix += static_cast<std::uint64_t>(rep);
                cfg.seed = splitmix64(mix);

                ExplanationResult run;
                if (method == EstimatorKind::KernelShap) {
                    if (budget < 1) throw InputError("runBench: budget must be positive");
                    cfg.m = static_cast<int>(budget);
                    if (cfg.pairedSampling && cfg.m % 2 != 0) ++cfg.m;
                    run = kernelShap(game, cfg, /*untilConverged=*/false);
                } else {
                    const int m = cfg.batchSize(d);
                    const long iters = budget / m;
                    if (iters < 1)
                        throw InputError("runBench: budget " + std::to_string(budget) +
                                         " is smaller than one batch of " + std::to_string(m));
                    cfg.maxIterations = static_cast<int>(iters);
                    cfg.epsilon = 1e-12;  // spend the whole budget
                    run = method == EstimatorKind::StableSim ? stableSimShapley(game, cfg)
                                                             : simShapley(game, cfg);
                }
                biasSum += l2Bias(run.estimate.beta, groundTruth);
                millisSum += run.wallMillis;
            }
            table.push_back({estimatorName(method), budget, biasSum / reps, millisSum / reps});
        }
    }
    return table;
}

namespace {

RunOutput runBenchCommand(const RunSpec& spec) {
    GameContext ctx = buildGame(spec);
    EstimatorConfig base = spec.config;
    base.seed = spec.seed ^ 2ULL;

    Eigen::VectorXd truth;
    if (ctx.game->dimension() <= kEnumerationCap) {
        truth = exactShapley(*ctx.game).estimate.beta;
    } else {
        EstimatorConfig tight = base;
        tight.seed = spec.seed ^ 4ULL;
        tight.epsilon = base.epsilon / 5.0;
        truth = kernelShap(*ctx.game, tight, /*untilConverged=*/true).estimate.beta;
    }

    RunOutput out;
    out.boundary = ctx.game->boundary();
    out.featureNames = ctx.featureNames;
    out.bench = runBench(*ctx.game, truth,
                         spec.benchMethods.empty()
                             ? std::vector<EstimatorKind>{spec.estimator}
                             : spec.benchMethods,
                         spec.budgetGrid, spec.reps, base);
    if (!spec.outputPath.empty()) writeBenchCsv(out.bench, spec.outputPath);
    if (!spec.plotPath.empty()) {
        std::ofstream plot(spec.plotPath);
        if (!plot) throw InputError("cannot open " + spec.plotPath);
        emitPlotData(out.bench, plot);
    }
    return out;
}

RunOutput runRateStudy(const RunSpec& spec) {
    GameContext ctx = buildGame(spec);
    const int d = ctx.game->dimension();
    if (d > kEnumerationCap)
        throw InputError("rate-study needs an enumerable game (d <= " +
                         std::to_string(kEnumerationCap) + ")");

    EstimatorConfig config = spec.config;
    config.seed = spec.seed ^ 2ULL;
    config.epsilon = 1e-12;  // run the full window; the fit wants the whole decay
    config.maxIterations = std::min(config.maxIterations, 200);

    EnumerationBatchSource source(d);
    RunOutput out;
    out.result = runMomentumIteration(*ctx.game, config, source, /*withTrace=*/true);
    out.boundary = ctx.game->boundary();
    out.featureNames = ctx.featureNames;
    out.rate = fitQRate(out.result.trace, out.result.estimate.beta, spec.rateBurnIn);

    const auto reference = compareAgainstReference(spec, *ctx.game, out.result.estimate.beta);
    out.report = reportJson(out.result, config, out.boundary, gameKindName(spec.game),
                            ctx.featureNames, reference);
    out.report["rateStudy"] = {{"fittedRho", out.rate->fittedRho},
                               {"theoreticalRho", out.rate->theoreticalRho},
                               {"alpha", out.rate->alpha},
                               {"r2", out.rate->r2},
                               {"truncated", out.rate->truncated}};
    writeOutputs(spec, out, d);
    return out;
}

}  // namespace

RunOutput executeRun(const RunSpec& spec) {
    spec.config.validate();
    switch (spec.command) {
        case Command::Bench:
            return runBenchCommand(spec);
        case Command::RateStudy:
            return runRateStudy(spec);
        case Command::ExplainLocal:
        case Command::ExplainGlobal:
        case Command::Exact:
        default:
            return runExplain(spec);
    }
}

}  // namespace simshap
