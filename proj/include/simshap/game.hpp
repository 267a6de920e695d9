#pragma once

#include "simshap/coalition.hpp"
#include "simshap/config.hpp"
#include "simshap/imputer.hpp"
#include "simshap/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace simshap {

/**
 * A cooperative game over d features. value() must be a pure function of the
 * coalition between nextIteration() calls, so batches of evaluations can run
 * concurrently; estimators call nextIteration() once per batch, which is when
 * expectation-valued games refresh their reference mini-batch.
 */
class CooperativeGame {
public:
    virtual ~CooperativeGame() = default;

    [[nodiscard]] virtual double value(const Coalition& z) const = 0;
    virtual void nextIteration() {}
    // Hint for the evaluation pool: true when one value() call is expensive
    // enough that spreading a batch across threads pays off.
    [[nodiscard]] virtual bool costlyEvaluation() const { return false; }

    [[nodiscard]] int dimension() const { return d_; }
    [[nodiscard]] const GameBoundary& boundary() const { return boundary_; }

protected:
    CooperativeGame(int d, GameBoundary boundary) : d_(d), boundary_(boundary) {}

    int d_;
    GameBoundary boundary_;
};

// An instance to explain: feature vector plus its observed label.
struct LocalInstance {
    Eigen::VectorXd x;
    double y = 0.0;
};

// Instances an expectation-valued game averages over.
struct ReferenceSet {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;

    ReferenceSet(Eigen::MatrixXd X_, Eigen::VectorXd y_);
    [[nodiscard]] Eigen::Index size() const { return X.rows(); }
    [[nodiscard]] LocalInstance instance(Eigen::Index i) const { return {X.row(i).transpose(), y[i]}; }
};

enum class LossKind { SquaredError, CrossEntropy };

// Pointwise loss. Cross-entropy clamps predictions to [1e-12, 1 - 1e-12].
double lossValue(double prediction, double label, LossKind kind);

// Game read from a full table of 2^d coalition values.
class TabulatedGame final : public CooperativeGame {
public:
    TabulatedGame(int d, std::vector<double> values);

    [[nodiscard]] double value(const Coalition& z) const override;
    [[nodiscard]] const std::vector<double>& table() const { return values_; }

private:
    std::vector<double> values_;
};

std::unique_ptr<CooperativeGame> tabulatedGame(int d, std::vector<double> values);

// Table file format: one line per coalition, "<bitstring> <value>", bit 0
// leftmost; all 2^d lines must be present (any order).
std::unique_ptr<CooperativeGame> tabulatedGameFromFile(const std::string& path);

/**
 * v(S) = -loss(E[f | x_S], y): how much of the instance's (negated) loss the
 * observed features explain, with hidden features integrated out by the
 * imputer and the expectation taken inside the loss.
 */
std::unique_ptr<CooperativeGame> lossGameLocal(std::shared_ptr<const PredictiveModel> model,
                                               std::shared_ptr<const Imputer> imputer,
                                               LocalInstance instance, LossKind loss);

/**
 * v(S) = E[f(x_S, X_{S^c})]: the model output itself, hidden features
 * integrated out. For classifiers the explained output is the probability of
 * positiveClass (0 or 1).
 */
std::unique_ptr<CooperativeGame> predictionGameLocal(std::shared_ptr<const PredictiveModel> model,
                                                     std::shared_ptr<const Imputer> imputer,
                                                     LocalInstance instance, int positiveClass = 1);

using LocalGameFactory =
    std::function<std::unique_ptr<CooperativeGame>(const LocalInstance&)>;

/**
 * Population-level game V(S) = E over instances of v(S; instance). Each
 * estimator iteration draws a fresh mini-batch of B reference instances
 * (without replacement) and value() averages the local games over that batch.
 * The boundary is averaged over the whole reference set once, at construction.
 */
std::unique_ptr<CooperativeGame> globalGame(const LocalGameFactory& factory,
                                            const ReferenceSet& reference, int B,
                                            std::uint64_t seed);

}  // namespace simshap
