#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace simshap {

// A numeric table with one designated label column split out.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> featureNames;
    std::string labelName;

    [[nodiscard]] Eigen::Index rows() const { return X.rows(); }
    [[nodiscard]] Eigen::Index features() const { return X.cols(); }
};

/**
 * Reads a headered CSV of numbers. Fields may be RFC-4180 quoted; every cell
 * must parse as a finite number (a NaN cell is an error naming its row and
 * column), and every row must match the header's width (reported with its
 * line number). The label column is selected by name.
 */
Dataset ingestCsv(const std::string& path, const std::string& labelColumn);

// Disjoint row index sets: model fitting, reference pool, explained instances.
struct DataSplits {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> referencePool;
    std::vector<Eigen::Index> test;
};

// Shuffles row indices with the given seed and cuts 70/20/10. Every part is
// guaranteed at least one row; tiny datasets are an error.
DataSplits splitRows(Eigen::Index rows, std::uint64_t seed);

Eigen::MatrixXd selectRows(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& idx);
Eigen::VectorXd selectRows(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& idx);

}  // namespace simshap
