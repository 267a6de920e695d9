#pragma once

#include "simshap/config.hpp"
#include "simshap/estimators.hpp"

#include <json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace simshap {

inline constexpr int kReportSchemaVersion = 1;

// Optional comparison against a second estimator's attributions.
struct ReferenceComparison {
    std::string method;
    Eigen::VectorXd attributions;
    double bias = 0.0;
    double consistency = 0.0;
};

/**
 * Serializes a finished run. Key order is alphabetical and value formatting
 * is shortest-round-trip, so two runs with the same seed produce identical
 * bytes except for the wall-clock field.
 */
nlohmann::json reportJson(const ExplanationResult& result, const EstimatorConfig& config,
                          const GameBoundary& boundary, const std::string& gameKind,
                          const std::vector<std::string>& featureNames,
                          const std::optional<ReferenceComparison>& reference = std::nullopt);

void writeReport(const nlohmann::json& report, const std::string& path);

// Trace table: n, beta_0..beta_{d-1}, max_sigma, range, r, flagged, evals, millis.
void writeTraceCsv(const IterationTrace& trace, int d, std::ostream& out);
void writeTraceCsv(const IterationTrace& trace, int d, const std::string& path);

struct BenchRow {
    std::string method;
    long budget = 0;
    double meanBias = 0.0;
    double meanMillis = 0.0;
};

// method,budget,mean_bias,mean_millis
void writeBenchCsv(const std::vector<BenchRow>& table, std::ostream& out);
void writeBenchCsv(const std::vector<BenchRow>& table, const std::string& path);

/**
 * Long-format plotting data: one row per (series, x, y). A result's trace
 * plots the stopping statistic per iteration (or the error per iteration
 * when reference attributions are supplied); a bench table plots mean bias
 * per budget. An empty trace yields just the header.
 */
void emitPlotData(const ExplanationResult& result,
                  const std::optional<Eigen::VectorXd>& reference, std::ostream& out);
void emitPlotData(const std::vector<BenchRow>& table, std::ostream& out);

}  // namespace simshap
