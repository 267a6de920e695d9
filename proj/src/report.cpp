#include "simshap/report.hpp"

#include "simshap/csv.hpp"
#include "simshap/errors.hpp"
#include "simshap/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace simshap {

namespace {

std::string formatDouble(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

std::vector<double> toStdVector(const Eigen::VectorXd& v) {
    return std::vector<double>(v.begin(), v.end());
}

}  // namespace

nlohmann::json reportJson(const ExplanationResult& result, const EstimatorConfig& config,
                          const GameBoundary& boundary, const std::string& gameKind,
                          const std::vector<std::string>& featureNames,
                          const std::optional<ReferenceComparison>& reference) {
    nlohmann::json j;
    j["schemaVersion"] = kReportSchemaVersion;
    j["estimator"] = result.method;
    j["game"] = gameKind;
    j["d"] = result.estimate.beta.size();
    j["featureNames"] = featureNames;
    j["attributions"] = toStdVector(result.estimate.beta);
    j["iterations"] = result.estimate.iteration;
    j["converged"] = result.estimate.converged;
    j["gameEvaluations"] = result.gameEvaluations;
    j["maxSigma"] = std::isnan(result.maxSigma) ? nlohmann::json() : nlohmann::json(result.maxSigma);
    j["range"] = std::isnan(result.range) ? nlohmann::json() : nlohmann::json(result.range);
    j["efficiencyGap"] = std::abs(result.estimate.beta.sum() - boundary.c());
    j["boundary"] = {{"vEmpty", boundary.vEmpty}, {"vFull", boundary.vFull}, {"c", boundary.c()}};
    j["flags"] = {{"singularJitterApplied", result.jitterApplied}};
    j["config"] = {{"t", config.t},
                   {"lambda", config.lambda},
                   {"m", config.m},
                   {"epsilon", config.epsilon},
                   {"xi", config.xi},
                   {"batchB", config.batchB},
                   {"maxIterations", config.maxIterations},
                   {"seed", config.seed},
                   {"paired", config.pairedSampling},
                   {"biasCorrection", config.biasCorrection},
                   {"negativeSamplingGuard", config.negativeSamplingGuard}};
    if (reference) {
        j["reference"] = {{"estimator", reference->method},
                          {"attributions", toStdVector(reference->attributions)},
                          {"bias", reference->bias},
                          {"consistency", reference->consistency}};
    } else {
        j["reference"] = nullptr;
    }
    j["wallMillis"] = result.wallMillis;
    return j;
}

void writeReport(const nlohmann::json& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("writeReport: cannot open " + path);
    out << report.dump(2) << '\n';
}

void writeTraceCsv(const IterationTrace& trace, int d, std::ostream& out) {
    std::vector<std::string> header{"n"};
    for (int i = 0; i < d; ++i) header.push_back("beta_" + std::to_string(i));
    for (const char* name : {"max_sigma", "range", "r", "flagged", "evals", "millis"})
        header.emplace_back(name);
    writeCsvRow(out, header);

    for (const TraceRecord& rec : trace.records) {
        std::vector<std::string> row;
        row.push_back(std::to_string(rec.n));
        for (int i = 0; i < d; ++i) row.push_back(formatDouble(rec.beta[i]));
        row.push_back(std::isnan(rec.maxSigma) ? "" : formatDouble(rec.maxSigma));
        row.push_back(std::isnan(rec.range) ? "" : formatDouble(rec.range));
        row.push_back(std::isnan(rec.guardRatio) ? "" : formatDouble(rec.guardRatio));
        row.push_back(rec.flagged ? "1" : "0");
        row.push_back(std::to_string(rec.evaluations));
        row.push_back(formatDouble(rec.millis));
        writeCsvRow(out, row);
    }
}

void writeTraceCsv(const IterationTrace& trace, int d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("writeTraceCsv: cannot open " + path);
    writeTraceCsv(trace, d, out);
}

void writeBenchCsv(const std::vector<BenchRow>& table, std::ostream& out) {
    writeCsvRow(out, {"method", "budget", "mean_bias", "mean_millis"});
    for (const BenchRow& row : table)
        writeCsvRow(out, {row.method, std::to_string(row.budget), formatDouble(row.meanBias),
                          formatDouble(row.meanMillis)});
}

void writeBenchCsv(const std::vector<BenchRow>& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("writeBenchCsv: cannot open " + path);
    writeBenchCsv(table, out);
}

void emitPlotData(const ExplanationResult& result,
                  const std::optional<Eigen::VectorXd>& reference, std::ostream& out) {
    writeCsvRow(out, {"series", "x", "y"});
    for (const TraceRecord& rec : result.trace.records) {
        double y;
        if (reference)
            y = l2Bias(rec.beta, *reference);
        else if (!std::isnan(rec.maxSigma))
            y = rec.maxSigma;
        else
            continue;
        writeCsvRow(out, {result.method, std::to_string(rec.n), formatDouble(y)});
    }
}

void emitPlotData(const std::vector<BenchRow>& table, std::ostream& out) {
    writeCsvRow(out, {"series", "x", "y"});
    for (const BenchRow& row : table)
        writeCsvRow(out, {row.method, std::to_string(row.budget), formatDouble(row.meanBias)});
}

}  // namespace simshap
