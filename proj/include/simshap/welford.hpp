#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace simshap {

/**
 * Streaming per-coordinate mean and variance over a sequence of vectors,
 * updated in one pass. Numerically stable for long trajectories where the
 * naive sum-of-squares form loses the small variance between near-equal
 * iterates. Two accumulators over disjoint sample streams can be merged.
 */
class WelfordAccumulator {
public:
    explicit WelfordAccumulator(Eigen::Index dim)
        : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}

    void update(const Eigen::Ref<const Eigen::VectorXd>& sample) {
        if (sample.size() != mean_.size())
            throw std::invalid_argument("WelfordAccumulator: sample dimension mismatch");
        if (!sample.allFinite())
            throw std::invalid_argument("WelfordAccumulator: non-finite sample component");
        ++count_;
        const Eigen::VectorXd delta = sample - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta.cwiseProduct(sample - mean_);
    }

    void merge(const WelfordAccumulator& other) {
        if (other.mean_.size() != mean_.size())
            throw std::invalid_argument("WelfordAccumulator: merge dimension mismatch");
        if (other.count_ == 0) return;
        if (count_ == 0) {
            *this = other;
            return;
        }
        const long total = count_ + other.count_;
        const Eigen::VectorXd delta = other.mean_ - mean_;
        const double na = static_cast<double>(count_);
        const double nb = static_cast<double>(other.count_);
        mean_ += delta * (nb / static_cast<double>(total));
        m2_ += other.m2_ + delta.cwiseProduct(delta) * (na * nb / static_cast<double>(total));
        count_ = total;
    }

    [[nodiscard]] long count() const { return count_; }

    [[nodiscard]] const Eigen::VectorXd& mean() const {
        if (count_ < 1) throw std::logic_error("WelfordAccumulator: mean undefined before any sample");
        return mean_;
    }

    // Unbiased per-coordinate sample variance; defined from the second sample on.
    [[nodiscard]] Eigen::VectorXd variance() const {
        if (count_ < 2) throw std::logic_error("WelfordAccumulator: variance undefined before two samples");
        return m2_ / static_cast<double>(count_ - 1);
    }

    // Variance the stream would have after absorbing one more sample, without
    // mutating the accumulator.
    [[nodiscard]] Eigen::VectorXd varianceWith(const Eigen::Ref<const Eigen::VectorXd>& sample) const {
        WelfordAccumulator probe = *this;
        probe.update(sample);
        return probe.variance();
    }

    [[nodiscard]] const Eigen::VectorXd& sumSquaredDeviations() const { return m2_; }

private:
    long count_ = 0;
    Eigen::VectorXd mean_;
    Eigen::VectorXd m2_;
};

}  // namespace simshap
