#include "simshap/dataset.hpp"

#include "simshap/errors.hpp"
#include "simshap/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace simshap {

namespace {

// Splits one CSV line into fields, honoring RFC-4180 quoting. Embedded
// newlines are not supported; a dangling quote is a format error.
std::vector<std::string> splitCsvLine(const std::string& line, long lineNo) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"' && field.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    if (quoted)
        throw InputError("CSV line " + std::to_string(lineNo) + ": unterminated quoted field");
    fields.push_back(std::move(field));
    return fields;
}

double parseCell(const std::string& cell, long lineNo, const std::string& column) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw InputError("CSV line " + std::to_string(lineNo) + ", column '" + column +
                         "': cannot parse '" + cell + "' as a number");
    if (std::isnan(value))
        throw InputError("CSV line " + std::to_string(lineNo) + ", column '" + column +
                         "': NaN cell");
    return value;
}

}  // namespace

Dataset ingestCsv(const std::string& path, const std::string& labelColumn) {
    std::ifstream in(path);
    if (!in) throw InputError("ingestCsv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw InputError("ingestCsv: " + path + " is empty");
    const std::vector<std::string> header = splitCsvLine(line, 1);
    const auto width = header.size();

    long labelIdx = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == labelColumn) labelIdx = static_cast<long>(i);
    if (labelIdx < 0) {
        std::string available;
        for (const auto& name : header) available += (available.empty() ? "" : ", ") + name;
        throw InputError("ingestCsv: no column named '" + labelColumn + "' (columns: " + available +
                         ")");
    }

    std::vector<std::vector<double>> rows;
    long lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        const std::vector<std::string> fields = splitCsvLine(line, lineNo);
        if (fields.size() != width)
            throw InputError("ingestCsv: line " + std::to_string(lineNo) + " has " +
                             std::to_string(fields.size()) + " fields, header has " +
                             std::to_string(width));
        std::vector<double> row(width);
        for (std::size_t i = 0; i < width; ++i) row[i] = parseCell(fields[i], lineNo, header[i]);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError("ingestCsv: " + path + " has no data rows");

    Dataset data;
    data.labelName = labelColumn;
    for (std::size_t i = 0; i < width; ++i)
        if (static_cast<long>(i) != labelIdx) data.featureNames.push_back(header[i]);
    data.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
    data.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        Eigen::Index col = 0;
        for (std::size_t i = 0; i < width; ++i) {
            if (static_cast<long>(i) == labelIdx)
                data.y[static_cast<Eigen::Index>(r)] = rows[r][i];
            else
                data.X(static_cast<Eigen::Index>(r), col++) = rows[r][i];
        }
    }
    return data;
}

DataSplits splitRows(Eigen::Index rows, std::uint64_t seed) {
    if (rows < 3) throw InputError("splitRows: need at least three rows to form disjoint splits");
    std::vector<Eigen::Index> order(rows);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (Eigen::Index i = rows - 1; i > 0; --i) {
        const auto j =
            static_cast<Eigen::Index>(rng.nextBelow(static_cast<std::uint64_t>(i) + 1));
        std::swap(order[i], order[j]);
    }
    auto trainEnd = static_cast<Eigen::Index>(std::llround(0.7 * static_cast<double>(rows)));
    auto refEnd = static_cast<Eigen::Index>(std::llround(0.9 * static_cast<double>(rows)));
    trainEnd = std::clamp<Eigen::Index>(trainEnd, 1, rows - 2);
    refEnd = std::clamp<Eigen::Index>(refEnd, trainEnd + 1, rows - 1);

    DataSplits splits;
    splits.train.assign(order.begin(), order.begin() + trainEnd);
    splits.referencePool.assign(order.begin() + trainEnd, order.begin() + refEnd);
    splits.test.assign(order.begin() + refEnd, order.end());
    return splits;
}

Eigen::MatrixXd selectRows(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
    return out;
}

Eigen::VectorXd selectRows(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[idx[i]];
    return out;
}

}  // namespace simshap
