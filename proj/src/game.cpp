#include "simshap/game.hpp"

#include "simshap/errors.hpp"
#include "simshap/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace simshap {

ReferenceSet::ReferenceSet(Eigen::MatrixXd X_, Eigen::VectorXd y_)
    : X(std::move(X_)), y(std::move(y_)) {
    if (X.rows() != y.size()) throw std::invalid_argument("ReferenceSet: row count mismatch");
    if (X.rows() < 1) throw std::invalid_argument("ReferenceSet: need at least one instance");
}

double lossValue(double prediction, double label, LossKind kind) {
    if (kind == LossKind::SquaredError) {
        const double e = prediction - label;
        return e * e;
    }
    const double p = std::clamp(prediction, 1e-12, 1.0 - 1e-12);
    return -(label * std::log(p) + (1.0 - label) * std::log1p(-p));
}

TabulatedGame::TabulatedGame(int d, std::vector<double> values)
    : CooperativeGame(d, GameBoundary{}), values_(std::move(values)) {
    if (d < 1 || d > kEnumerationCap)
        throw std::invalid_argument("TabulatedGame: dimension outside enumeration range");
    if (values_.size() != (std::size_t{1} << d))
        throw std::invalid_argument("TabulatedGame: table must hold exactly 2^d values");
    boundary_.vEmpty = values_.front();
    boundary_.vFull = values_.back();
}

double TabulatedGame::value(const Coalition& z) const {
    if (z.dimension() != d_) throw std::invalid_argument("TabulatedGame: coalition dimension mismatch");
    return values_[z.index()];
}

std::unique_ptr<CooperativeGame> tabulatedGame(int d, std::vector<double> values) {
    return std::make_unique<TabulatedGame>(d, std::move(values));
}

std::unique_ptr<CooperativeGame> tabulatedGameFromFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("tabulatedGameFromFile: cannot open " + path);

    int d = -1;
    std::vector<double> values;
    std::vector<bool> seen;
    std::string line;
    long lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string bits;
        double v = 0.0;
        if (!(fields >> bits >> v))
            throw InputError("tabulatedGameFromFile: malformed line " + std::to_string(lineNo));
        if (d < 0) {
            d = static_cast<int>(bits.size());
            if (d < 1 || d > kEnumerationCap)
                throw InputError("tabulatedGameFromFile: dimension outside enumeration range");
            values.assign(std::size_t{1} << d, 0.0);
            seen.assign(std::size_t{1} << d, false);
        }
        if (static_cast<int>(bits.size()) != d)
            throw InputError("tabulatedGameFromFile: inconsistent bitstring length at line " +
                                     std::to_string(lineNo));
        std::uint64_t idx = 0;
        for (int i = 0; i < d; ++i) {
            if (bits[i] == '1')
                idx |= std::uint64_t{1} << i;  // bit 0 is the leftmost character
            else if (bits[i] != '0')
                throw InputError("tabulatedGameFromFile: invalid bitstring at line " +
                                         std::to_string(lineNo));
        }
        if (seen[idx])
            throw InputError("tabulatedGameFromFile: duplicate coalition at line " +
                                     std::to_string(lineNo));
        seen[idx] = true;
        values[idx] = v;
    }
    if (d < 0) throw InputError("tabulatedGameFromFile: empty table");
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
            throw InputError("tabulatedGameFromFile: missing coalition index " + std::to_string(i));
    return tabulatedGame(d, std::move(values));
}

namespace {

class LossGameLocal final : public CooperativeGame {
public:
    LossGameLocal(std::shared_ptr<const PredictiveModel> model,
                  std::shared_ptr<const Imputer> imputer, LocalInstance instance, LossKind loss)
        : CooperativeGame(static_cast<int>(instance.x.size()), GameBoundary{}),
          model_(std::move(model)), imputer_(std::move(imputer)),
          instance_(std::move(instance)), loss_(loss) {
        if (imputer_->dimension() != d_)
            throw std::invalid_argument("lossGameLocal: imputer dimension mismatch");
        if (model_->weights.size() != d_)
            throw std::invalid_argument("lossGameLocal: model dimension mismatch");
        if (loss_ == LossKind::CrossEntropy && model_->kind != ModelKind::Logistic)
            throw std::invalid_argument(
                "lossGameLocal: cross-entropy needs a probability-valued model");
        boundary_.vEmpty = evaluate(Coalition(Eigen::VectorXd::Zero(d_)));
        boundary_.vFull = evaluate(Coalition(Eigen::VectorXd::Ones(d_)));
    }

    [[nodiscard]] double value(const Coalition& z) const override { return evaluate(z); }
    [[nodiscard]] bool costlyEvaluation() const override { return true; }

private:
    double evaluate(const Coalition& z) const {
        const double meanPred = model_->predict(imputer_->complete(instance_.x, z)).mean();
        return -lossValue(meanPred, instance_.y, loss_);
    }

    std::shared_ptr<const PredictiveModel> model_;
    std::shared_ptr<const Imputer> imputer_;
    LocalInstance instance_;
    LossKind loss_;
};

class PredictionGameLocal final : public CooperativeGame {
public:
    PredictionGameLocal(std::shared_ptr<const PredictiveModel> model,
                        std::shared_ptr<const Imputer> imputer, LocalInstance instance,
                        int positiveClass)
        : CooperativeGame(static_cast<int>(instance.x.size()), GameBoundary{}),
          model_(std::move(model)), imputer_(std::move(imputer)),
          instance_(std::move(instance)), positiveClass_(positiveClass) {
        if (imputer_->dimension() != d_)
            throw std::invalid_argument("predictionGameLocal: imputer dimension mismatch");
        if (model_->weights.size() != d_)
            throw std::invalid_argument("predictionGameLocal: model dimension mismatch");
        if (positiveClass_ != 0 && positiveClass_ != 1)
            throw std::invalid_argument("predictionGameLocal: class must be 0 or 1");
        boundary_.vEmpty = evaluate(Coalition(Eigen::VectorXd::Zero(d_)));
        boundary_.vFull = evaluate(Coalition(Eigen::VectorXd::Ones(d_)));
    }

    [[nodiscard]] double value(const Coalition& z) const override { return evaluate(z); }
    [[nodiscard]] bool costlyEvaluation() const override { return true; }

private:
    double evaluate(const Coalition& z) const {
        double meanPred = model_->predict(imputer_->complete(instance_.x, z)).mean();
        if (model_->kind == ModelKind::Logistic && positiveClass_ == 0) meanPred = 1.0 - meanPred;
        return meanPred;
    }

    std::shared_ptr<const PredictiveModel> model_;
    std::shared_ptr<const Imputer> imputer_;
    LocalInstance instance_;
    int positiveClass_;
};

class GlobalGame final : public CooperativeGame {
public:
    GlobalGame(const LocalGameFactory& factory, const ReferenceSet& reference, int B,
               std::uint64_t seed)
        : CooperativeGame(static_cast<int>(reference.X.cols()), GameBoundary{}),
          B_(B), rng_(seed), indices_(reference.size()) {
        if (B_ < 1) throw std::invalid_argument("globalGame: batch size must be positive");
        if (B_ > reference.size())
            throw std::invalid_argument("globalGame: batch size exceeds the reference set");
        locals_.reserve(reference.size());
        for (Eigen::Index i = 0; i < reference.size(); ++i) {
            locals_.push_back(factory(reference.instance(i)));
            if (locals_.back()->dimension() != d_)
                throw std::invalid_argument("globalGame: local game dimension mismatch");
            boundary_.vEmpty += locals_.back()->boundary().vEmpty;
            boundary_.vFull += locals_.back()->boundary().vFull;
        }
        boundary_.vEmpty /= static_cast<double>(locals_.size());
        boundary_.vFull /= static_cast<double>(locals_.size());
        std::iota(indices_.begin(), indices_.end(), 0);
        batch_.assign(indices_.begin(), indices_.begin() + B_);
    }

    [[nodiscard]] double value(const Coalition& z) const override {
        double sum = 0.0;
        for (const long i : batch_) sum += locals_[i]->value(z);
        return sum / static_cast<double>(B_);
    }

    void nextIteration() override {
        // Partial Fisher-Yates over reference indices: unbiased sample of B
        // distinct instances.
        const auto n = static_cast<std::uint64_t>(indices_.size());
        for (int i = 0; i < B_; ++i) {
            const auto j = i + static_cast<long>(rng_.nextBelow(n - i));
            std::swap(indices_[i], indices_[j]);
            batch_[i] = indices_[i];
        }
    }

    [[nodiscard]] bool costlyEvaluation() const override { return true; }

private:
    int B_;
    Rng rng_;
    std::vector<long> indices_;
    std::vector<long> batch_;
    std::vector<std::unique_ptr<CooperativeGame>> locals_;
};

}  // namespace

std::unique_ptr<CooperativeGame> lossGameLocal(std::shared_ptr<const PredictiveModel> model,
                                               std::shared_ptr<const Imputer> imputer,
                                               LocalInstance instance, LossKind loss) {
    return std::make_unique<LossGameLocal>(std::move(model), std::move(imputer),
                                           std::move(instance), loss);
}

std::unique_ptr<CooperativeGame> predictionGameLocal(std::shared_ptr<const PredictiveModel> model,
                                                     std::shared_ptr<const Imputer> imputer,
                                                     LocalInstance instance, int positiveClass) {
    return std::make_unique<PredictionGameLocal>(std::move(model), std::move(imputer),
                                                 std::move(instance), positiveClass);
}

std::unique_ptr<CooperativeGame> globalGame(const LocalGameFactory& factory,
                                            const ReferenceSet& reference, int B,
                                            std::uint64_t seed) {
    return std::make_unique<GlobalGame>(factory, reference, B, seed);
}

}  // namespace simshap
