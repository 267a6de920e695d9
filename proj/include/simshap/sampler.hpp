#pragma once

#include "simshap/coalition.hpp"
#include "simshap/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace simshap {

/**
 * Draws coalitions from the Shapley kernel distribution restricted to the
 * admissible sizes 0 < |S| < d, in two stages:
 *
 *   1. size k with probability proportional to (d - 1) / (k (d - k)),
 *      which is the kernel weight summed over the C(d, k) coalitions of
 *      that size;
 *   2. a uniformly random k-subset of the d features.
 *
 * In paired mode coalitions are emitted in complement pairs (z, 1 - z),
 * which leaves the kernel distribution invariant (the size law is symmetric
 * in k and d - k) while cancelling odd fluctuations between a subset and
 * its complement.
 */
class KernelSampler {
public:
    KernelSampler(int d, std::uint64_t seed, bool paired = false)
        : d_(d), paired_(paired), rng_(seed), perm_(d) {
        if (d < 2) throw std::invalid_argument("KernelSampler: need d >= 2");
        sizeCdf_.resize(d - 1);
        double total = 0.0;
        for (int k = 1; k < d; ++k) {
            total += (d - 1.0) / (double(k) * double(d - k));
            sizeCdf_[k - 1] = total;
        }
        for (double& c : sizeCdf_) c /= total;
        sizeCdf_.back() = 1.0;
        std::iota(perm_.begin(), perm_.end(), 0);
    }

    [[nodiscard]] int dimension() const { return d_; }
    [[nodiscard]] bool paired() const { return paired_; }

    // Normalized size law over k = 1 .. d-1.
    [[nodiscard]] Eigen::VectorXd sizeDistribution() const {
        Eigen::VectorXd p(d_ - 1);
        double prev = 0.0;
        for (int k = 1; k < d_; ++k) {
            p[k - 1] = sizeCdf_[k - 1] - prev;
            prev = sizeCdf_[k - 1];
        }
        return p;
    }

    Coalition sample() {
        const int k = sampleSize();
        Eigen::VectorXd z = Eigen::VectorXd::Zero(d_);
        // Partial Fisher-Yates: the first k entries of perm_ become a
        // uniformly random k-subset.
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(rng_.nextBelow(static_cast<std::uint64_t>(d_ - i)));
            std::swap(perm_[i], perm_[j]);
            z[perm_[i]] = 1.0;
        }
        return Coalition(std::move(z));
    }

    std::vector<Coalition> sampleBatch(int m) {
        if (m < 1) throw std::invalid_argument("KernelSampler: batch size must be positive");
        if (paired_ && m % 2 != 0)
            throw std::invalid_argument("KernelSampler: paired sampling needs an even batch size");
        std::vector<Coalition> batch;
        batch.reserve(m);
        if (paired_) {
            for (int i = 0; i < m / 2; ++i) {
                Coalition z = sample();
                Coalition zc = z.complement();
                batch.push_back(std::move(z));
                batch.push_back(std::move(zc));
            }
        } else {
            for (int i = 0; i < m; ++i) batch.push_back(sample());
        }
        return batch;
    }

private:
    int sampleSize() {
        const double u = rng_.nextDouble();
        int lo = 0, hi = d_ - 2;
        while (lo < hi) {
            const int mid = (lo + hi) / 2;
            if (u < sizeCdf_[mid])
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo + 1;
    }

    int d_;
    bool paired_;
    Rng rng_;
    std::vector<int> perm_;
    std::vector<double> sizeCdf_;
};

inline KernelSampler buildSampler(int d, std::uint64_t seed, bool paired = false) {
    return KernelSampler(d, seed, paired);
}

}  // namespace simshap
