#include "simshap/model.hpp"

#include "simshap/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace simshap {

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& s) {
    return 1.0 / (1.0 + (-s.array()).exp());
}

}  // namespace

Eigen::VectorXd PredictiveModel::predict(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
    if (X.cols() != weights.size())
        throw std::invalid_argument("PredictiveModel::predict: feature count mismatch");
    Eigen::VectorXd s = (X * weights).array() + intercept;
    return kind == ModelKind::Linear ? s : sigmoid(s);
}

double PredictiveModel::predictOne(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return predict(x.transpose())[0];
}

PredictiveModel fitLinear(const Eigen::Ref<const Eigen::MatrixXd>& X,
                          const Eigen::Ref<const Eigen::VectorXd>& y, double ridge) {
    if (X.rows() != y.size()) throw std::invalid_argument("fitLinear: row count mismatch");
    if (X.rows() < 1) throw std::invalid_argument("fitLinear: empty design");
    if (ridge < 0.0) throw std::invalid_argument("fitLinear: ridge must be non-negative");

    const Eigen::Index d = X.cols();
    const Eigen::Index n = X.rows();

    // Normal equations over [w; b], ridge applied to the w block only.
    Eigen::MatrixXd M(d + 1, d + 1);
    M.topLeftCorner(d, d) = X.transpose() * X + ridge * Eigen::MatrixXd::Identity(d, d);
    M.topRightCorner(d, 1) = X.colwise().sum().transpose();
    M.bottomLeftCorner(1, d) = X.colwise().sum();
    M(d, d) = static_cast<double>(n);

    Eigen::VectorXd rhs(d + 1);
    rhs.head(d) = X.transpose() * y;
    rhs[d] = y.sum();

    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible())
        throw SingularSystem("fitLinear: singular normal equations (rank-deficient design with ridge = 0)");
    const Eigen::VectorXd sol = lu.solve(rhs);

    PredictiveModel model;
    model.kind = ModelKind::Linear;
    model.weights = sol.head(d);
    model.intercept = sol[d];
    return model;
}

PredictiveModel fitLogistic(const Eigen::Ref<const Eigen::MatrixXd>& X,
                            const Eigen::Ref<const Eigen::VectorXd>& y, double l2,
                            int maxIter) {
    if (X.rows() != y.size()) throw std::invalid_argument("fitLogistic: row count mismatch");
    if (X.rows() < 1) throw std::invalid_argument("fitLogistic: empty design");
    if (l2 < 0.0) throw std::invalid_argument("fitLogistic: l2 must be non-negative");
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] != 0.0 && y[i] != 1.0)
            throw std::invalid_argument("fitLogistic: labels must be 0 or 1");

    const Eigen::Index d = X.cols();
    const Eigen::Index n = X.rows();
    const double invN = 1.0 / static_cast<double>(n);

    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    double b = 0.0;
    constexpr double kGradTol = 1e-8;

    for (int iter = 0; iter < maxIter; ++iter) {
        const Eigen::VectorXd p = sigmoid((X * w).array() + b);
        const Eigen::VectorXd resid = p - y;

        Eigen::VectorXd grad(d + 1);
        grad.head(d) = invN * (X.transpose() * resid) + 2.0 * l2 * w;
        grad[d] = invN * resid.sum();
        if (grad.norm() < kGradTol) break;

        const Eigen::VectorXd s = p.array() * (1.0 - p.array());
        Eigen::MatrixXd H(d + 1, d + 1);
        H.topLeftCorner(d, d) =
            invN * (X.transpose() * s.asDiagonal() * X) + 2.0 * l2 * Eigen::MatrixXd::Identity(d, d);
        H.topRightCorner(d, 1) = invN * (X.transpose() * s);
        H.bottomLeftCorner(1, d) = H.topRightCorner(d, 1).transpose();
        H(d, d) = invN * s.sum();
        // Tiny floor keeps the step defined when predictions saturate.
        H.diagonal().array() += 1e-12;

        const Eigen::VectorXd step = H.ldlt().solve(grad);
        if (!step.allFinite()) break;
        w -= step.head(d);
        b -= step[d];
    }

    PredictiveModel model;
    model.kind = ModelKind::Logistic;
    model.weights = w;
    model.intercept = b;
    return model;
}

void saveModel(const PredictiveModel& model, const std::string& path) {
    nlohmann::json j;
    j["kind"] = model.kind == ModelKind::Linear ? "linear" : "logistic";
    j["weights"] = std::vector<double>(model.weights.begin(), model.weights.end());
    j["intercept"] = model.intercept;
    std::ofstream out(path);
    if (!out) throw InputError("saveModel: cannot open " + path);
    out << j.dump(2) << '\n';
}

PredictiveModel loadModel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("loadModel: cannot open " + path);
    PredictiveModel model;
    try {
        nlohmann::json j;
        in >> j;
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "linear")
            model.kind = ModelKind::Linear;
        else if (kind == "logistic")
            model.kind = ModelKind::Logistic;
        else
            throw InputError("loadModel: unknown model kind '" + kind + "'");
        const auto w = j.at("weights").get<std::vector<double>>();
        model.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
        model.intercept = j.at("intercept").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError("loadModel: " + path + " is not a valid model file: " + e.what());
    }
    return model;
}

}  // namespace simshap
