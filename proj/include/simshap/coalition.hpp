#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace simshap {

// Largest dimension for which full 2^d enumeration (exact oracle, tabulated
// games, enumeration batches) is permitted.
inline constexpr int kEnumerationCap = 20;

/**
 * A coalition over d features: a binary indicator vector, entry i set when
 * feature i is present. The indicator is held as a dense double vector with
 * entries exactly 0.0 or 1.0 so it can enter moment products directly.
 */
class Coalition {
public:
    Coalition(Eigen::VectorXd indicator) : z_(std::move(indicator)) {
        for (Eigen::Index i = 0; i < z_.size(); ++i) {
            if (z_[i] != 0.0 && z_[i] != 1.0)
                throw std::invalid_argument("Coalition: indicator entries must be 0 or 1");
        }
    }

    static Coalition fromIndex(std::uint64_t index, int d) {
        if (d < 1 || d > kEnumerationCap)
            throw std::invalid_argument("Coalition::fromIndex: dimension outside enumeration range");
        if (index >= (std::uint64_t{1} << d))
            throw std::invalid_argument("Coalition::fromIndex: index out of range");
        Eigen::VectorXd z(d);
        for (int i = 0; i < d; ++i) z[i] = static_cast<double>((index >> i) & 1U);
        return Coalition(std::move(z));
    }

    [[nodiscard]] int dimension() const { return static_cast<int>(z_.size()); }

    [[nodiscard]] int size() const { return static_cast<int>(std::lround(z_.sum())); }

    [[nodiscard]] bool contains(int i) const { return z_[i] == 1.0; }

    // Bitmask with bit i set when feature i is present. Valid for d <= 63;
    // only used on enumeration-scale dimensions.
    [[nodiscard]] std::uint64_t index() const {
        std::uint64_t idx = 0;
        for (int i = 0; i < dimension(); ++i)
            if (z_[i] == 1.0) idx |= std::uint64_t{1} << i;
        return idx;
    }

    [[nodiscard]] Coalition complement() const {
        return Coalition(Eigen::VectorXd::Ones(z_.size()) - z_);
    }

    [[nodiscard]] const Eigen::VectorXd& indicator() const { return z_; }

private:
    Eigen::VectorXd z_;
};

// log C(n, k) via lgamma, stable for any enumerable n.
inline double logBinomial(int n, int k) {
    if (k < 0 || k > n) throw std::invalid_argument("logBinomial: k out of range");
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/**
 * Shapley kernel weight for a coalition of size k out of d features:
 *
 *     (d - 1) / (C(d, k) * k * (d - k))
 *
 * Diverges at k = 0 and k = d; those sizes are excluded from sampling and
 * instead pin the solution through the sum constraint, so requesting them
 * is a domain error. Evaluated in log space to stay finite for large d.
 */
inline double shapleyKernelWeight(int d, int k) {
    if (d < 2) throw std::invalid_argument("shapleyKernelWeight: need d >= 2");
    if (k <= 0 || k >= d)
        throw std::domain_error("shapleyKernelWeight: weight is infinite at k = 0 and k = d");
    const double logw = std::log(d - 1.0) - logBinomial(d, k) - std::log(double(k) * double(d - k));
    return std::exp(logw);
}

inline Coalition coalitionFromIndex(std::uint64_t index, int d) { return Coalition::fromIndex(index, d); }

}  // namespace simshap
