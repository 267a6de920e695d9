#include "simshap/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace simshap {

double l2Bias(const Eigen::Ref<const Eigen::VectorXd>& estimate,
              const Eigen::Ref<const Eigen::VectorXd>& reference) {
    if (estimate.size() != reference.size())
        throw std::invalid_argument("l2Bias: attribution lengths differ");
    return (estimate - reference).norm();
}

double pearsonConsistency(const Eigen::Ref<const Eigen::VectorXd>& a,
                          const Eigen::Ref<const Eigen::VectorXd>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("pearsonConsistency: lengths differ");
    if (a.size() < 2) throw std::invalid_argument("pearsonConsistency: need at least two coordinates");
    const Eigen::VectorXd ca = a.array() - a.mean();
    const Eigen::VectorXd cb = b.array() - b.mean();
    const double na = ca.norm();
    const double nb = cb.norm();
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("pearsonConsistency: correlation undefined for constant input");
    return ca.dot(cb) / (na * nb);
}

ConvergenceRateReport fitQRate(const IterationTrace& trace,
                               const Eigen::Ref<const Eigen::VectorXd>& reference, int burnIn) {
    if (burnIn < 0) throw std::invalid_argument("fitQRate: negative burn-in");
    if (static_cast<long>(trace.records.size()) <= burnIn + 5)
        throw std::invalid_argument("fitQRate: trace too short for the requested burn-in");
    if (trace.meanA.rows() != reference.size())
        throw std::invalid_argument("fitQRate: reference dimension does not match the trace");

    ConvergenceRateReport report;

    // Error sequence past burn-in, truncated at the numerical floor: the
    // geometric decay bottoms out near machine precision and the tail would
    // otherwise flatten the fitted slope.
    const double scale = std::max(reference.norm(), 1.0);
    std::vector<double> xs, ys;
    double previous = std::numeric_limits<double>::infinity();
    for (const TraceRecord& rec : trace.records) {
        if (rec.n <= burnIn) continue;
        const double err = (rec.beta - reference).norm();
        const bool atFloor =
            err <= scale * 1e-12 || (err >= previous && err <= scale * 1e-8);
        if (atFloor || !std::isfinite(std::log(err))) {
            report.truncated = true;
            break;
        }
        xs.push_back(static_cast<double>(rec.n));
        ys.push_back(std::log(err));
        previous = err;
    }
    if (xs.size() < 2) throw std::invalid_argument("fitQRate: error floor leaves too few points to fit");

    const auto count = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= count;
    my /= count;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("fitQRate: degenerate iteration axis");
    const double slope = sxy / sxx;
    report.fittedRho = std::exp(slope);
    report.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);

    // Spectrum of the averaged second moment restricted to the hyperplane
    // 1^T beta = const, where the update contracts.
    const Eigen::Index d = reference.size();
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(d, 1);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
    const Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::MatrixXd basis = Q.rightCols(d - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(basis.transpose() * trace.meanA * basis);
    report.alpha = eig.eigenvalues().minCoeff();
    report.theoreticalRho = trace.t * trace.lambda / (report.alpha + trace.lambda);
    return report;
}

}  // namespace simshap
