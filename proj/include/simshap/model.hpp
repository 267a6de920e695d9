#pragma once

#include <Eigen/Dense>

#include <string>

namespace simshap {

enum class ModelKind { Linear, Logistic };

/**
 * A fitted generalized linear predictor. Linear models emit X w + b;
 * logistic models emit sigmoid(X w + b), the probability of class 1.
 */
struct PredictiveModel {
    ModelKind kind = ModelKind::Linear;
    Eigen::VectorXd weights;
    double intercept = 0.0;

    [[nodiscard]] Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& X) const;
    [[nodiscard]] double predictOne(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/**
 * Least squares with an l2 penalty on the weights (never on the intercept):
 * minimizes |X w + b 1 - y|^2 + ridge |w|^2 via the normal equations.
 * With ridge = 0 a rank-deficient design is an error, not a silent pick
 * among the minimizers.
 */
PredictiveModel fitLinear(const Eigen::Ref<const Eigen::MatrixXd>& X,
                          const Eigen::Ref<const Eigen::VectorXd>& y, double ridge);

/**
 * Binary logistic regression, labels in {0, 1}, mean cross-entropy plus
 * l2 |w|^2, fitted by damped Newton until the gradient norm drops below
 * 1e-8 or maxIter steps elapse. With l2 = 0 on separable data the optimum
 * is at infinity; the iteration cap keeps the returned weights finite.
 */
PredictiveModel fitLogistic(const Eigen::Ref<const Eigen::MatrixXd>& X,
                            const Eigen::Ref<const Eigen::VectorXd>& y, double l2,
                            int maxIter = 200);

// JSON round trip: {"kind": "linear"|"logistic", "weights": [...], "intercept": b}.
void saveModel(const PredictiveModel& model, const std::string& path);
PredictiveModel loadModel(const std::string& path);

}  // namespace simshap
