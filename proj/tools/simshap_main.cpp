#include "simshap/errors.hpp"
#include "simshap/runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using namespace simshap;

struct CliState {
    RunSpec spec;
    std::string modelArg = "linear";
    int threads = 0;
    CLI::Option* tOption = nullptr;
};

// Options shared by every subcommand that touches a dataset or estimator.
void addCommonOptions(CLI::App* cmd, CliState& state) {
    RunSpec& spec = state.spec;

    cmd->add_option("--data", spec.dataPath, "CSV dataset (or coalition table for --game table)")
        ->required();
    cmd->add_option("--label-col", spec.labelColumn, "name of the label column");
    cmd->add_option("--game", spec.game, "cooperative game to explain")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, GameSpecKind>{{"loss", GameSpecKind::Loss},
                                                {"prediction", GameSpecKind::Prediction},
                                                {"table", GameSpecKind::Table}},
            CLI::ignore_case));
    cmd->add_option("--loss", spec.loss, "pointwise loss for the loss game")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, LossKind>{{"mse", LossKind::SquaredError},
                                            {"squared-error", LossKind::SquaredError},
                                            {"ce", LossKind::CrossEntropy},
                                            {"cross-entropy", LossKind::CrossEntropy}},
            CLI::ignore_case));
    cmd->add_option("--model", state.modelArg,
                    "'linear', 'logistic', or a path to a saved model JSON");
    cmd->add_option("--estimator", spec.estimator, "attribution estimator")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, EstimatorKind>{{"sim", EstimatorKind::Sim},
                                                 {"stable-sim", EstimatorKind::StableSim},
                                                 {"kernelshap", EstimatorKind::KernelShap},
                                                 {"exact", EstimatorKind::Exact}},
            CLI::ignore_case));
    cmd->add_option("--imputer", spec.imputer, "how hidden features are completed")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, ImputerKind>{{"marginal", ImputerKind::MarginalBackground},
                                               {"mean", ImputerKind::Mean}},
            CLI::ignore_case));

    state.tOption = cmd->add_option("--t", spec.config.t,
                                    "momentum in (0, 1); default 0.5 local, 0.55 global");
    cmd->add_option("--lambda", spec.config.lambda, "l2 regularization of the update solve");
    cmd->add_option("--m", spec.config.m, "coalitions per batch (0: 10 * d)");
    cmd->add_option("--epsilon", spec.config.epsilon, "relative convergence threshold");
    cmd->add_option("--xi", spec.config.xi, "negative-sampling rejection threshold");
    cmd->add_option("--T", spec.config.maxIterations, "iteration cap");
    cmd->add_option("--batch-B", spec.config.batchB, "reference mini-batch size (global game)");
    cmd->add_flag("--paired", spec.config.pairedSampling, "sample coalitions in complement pairs");
    cmd->add_option("--seed", spec.seed, "root seed; one seed reproduces the whole run");

    cmd->add_option("--instance-index", spec.instanceIndex, "which test-split row to explain");
    cmd->add_option("--positive-class", spec.positiveClass,
                    "class whose probability the prediction game explains (0 or 1)")
        ->check(CLI::Range(0, 1));
    cmd->add_option("--background-size", spec.split.backgroundSize,
                    "imputer background rows drawn from the training split");
    cmd->add_option("--reference-size", spec.split.referenceSize,
                    "reference instances for the global game");
    cmd->add_option("--reference", spec.referenceEstimator,
                    "also run a reference estimator and report bias/consistency")
        ->check(CLI::IsMember({"exact", "kernelshap"}));
    cmd->add_option("--ridge", spec.model.ridge, "ridge strength when fitting a linear model");
    cmd->add_option("--threads", state.threads, "game evaluation threads (0: hardware)");

    cmd->add_option("--out", spec.outputPath, "write the run report JSON here");
    cmd->add_option("--trace", spec.tracePath, "write the per-iteration trace CSV here");
    cmd->add_option("--plot-data", spec.plotPath, "write long-format plotting rows here");
}

void finishSpec(CliState& state, Command command) {
    RunSpec& spec = state.spec;
    spec.command = command;
    if (state.tOption != nullptr && state.tOption->count() == 0 &&
        command == Command::ExplainGlobal)
        spec.config.t = 0.55;

    if (state.modelArg == "linear") {
        spec.model.source = ModelSpec::Source::FitLinear;
    } else if (state.modelArg == "logistic") {
        spec.model.source = ModelSpec::Source::FitLogistic;
    } else {
        spec.model.source = ModelSpec::Source::File;
        spec.model.path = state.modelArg;
    }
}

std::string formatValue(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void printExplanation(const RunOutput& out) {
    const ExplanationResult& result = out.result;
    const Eigen::VectorXd& beta = result.estimate.beta;

    std::cout << "method: " << result.method << "\n";
    std::cout << "iterations: " << result.estimate.iteration
              << (result.estimate.converged ? " (converged)" : " (iteration cap)") << "\n";
    std::cout << "game evaluations: " << result.gameEvaluations << "\n";
    std::cout << "boundary: v(empty) = " << formatValue(out.boundary.vEmpty)
              << ", v(full) = " << formatValue(out.boundary.vFull)
              << ", c = " << formatValue(out.boundary.c()) << "\n";
    std::cout << "efficiency gap: " << formatValue(std::abs(beta.sum() - out.boundary.c()))
              << "\n";

    if (out.rate) {
        std::cout << "fitted rho: " << formatValue(out.rate->fittedRho)
                  << ", predicted rho: " << formatValue(out.rate->theoreticalRho)
                  << ", alpha: " << formatValue(out.rate->alpha)
                  << ", r2: " << formatValue(out.rate->r2) << "\n";
    }
    if (out.report.contains("reference") && !out.report["reference"].is_null()) {
        std::cout << "reference (" << out.report["reference"]["estimator"].get<std::string>()
                  << "): bias = " << formatValue(out.report["reference"]["bias"].get<double>())
                  << ", consistency = "
                  << formatValue(out.report["reference"]["consistency"].get<double>()) << "\n";
    }

    std::cout << "attributions:\n";
    for (Eigen::Index i = 0; i < beta.size(); ++i) {
        const std::string name = i < static_cast<Eigen::Index>(out.featureNames.size())
                                     ? out.featureNames[i]
                                     : "f" + std::to_string(i);
        std::cout << "  " << name << " = " << formatValue(beta[i]) << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shapley-value attribution via stochastic momentum iteration"};
    app.require_subcommand(1);

    CliState local, global, exact, bench, rate;
    addCommonOptions(app.add_subcommand("explain-local", "attribute one instance"), local);
    addCommonOptions(app.add_subcommand("explain-global", "attribute the whole reference set"),
                     global);
    addCommonOptions(app.add_subcommand("exact", "brute-force enumeration oracle"), exact);

    CLI::App* benchCmd =
        app.add_subcommand("bench", "bias-versus-budget grid over estimators");
    addCommonOptions(benchCmd, bench);
    benchCmd->add_option("--budget-grid", bench.spec.budgetGrid,
                         "game-evaluation budgets, comma separated")
        ->required()
        ->delimiter(',');
    benchCmd->add_option("--reps", bench.spec.reps, "replicates per grid cell");
    benchCmd->add_option("--methods", bench.spec.benchMethods,
                         "estimators to benchmark, comma separated")
        ->delimiter(',')
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, EstimatorKind>{{"sim", EstimatorKind::Sim},
                                                 {"stable-sim", EstimatorKind::StableSim},
                                                 {"kernelshap", EstimatorKind::KernelShap}},
            CLI::ignore_case));

    CLI::App* rateCmd = app.add_subcommand(
        "rate-study", "measure the deterministic contraction rate on an enumerable game");
    addCommonOptions(rateCmd, rate);
    rateCmd->add_option("--burn-in", rate.spec.rateBurnIn,
                        "iterations dropped before the log-error fit");

    try {
        app.parse(argc, argv);

        CliState* state = nullptr;
        Command command = Command::ExplainLocal;
        if (app.got_subcommand("explain-local")) {
            state = &local;
            command = Command::ExplainLocal;
        } else if (app.got_subcommand("explain-global")) {
            state = &global;
            command = Command::ExplainGlobal;
        } else if (app.got_subcommand("exact")) {
            state = &exact;
            command = Command::Exact;
        } else if (app.got_subcommand("bench")) {
            state = &bench;
            command = Command::Bench;
        } else {
            state = &rate;
            command = Command::RateStudy;
        }
        finishSpec(*state, command);
        setEvaluationThreads(state->threads);

        const RunOutput out = executeRun(state->spec);
        if (command == Command::Bench) {
            writeBenchCsv(out.bench, std::cout);
        } else {
            printExplanation(out);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const SingularSystem& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
