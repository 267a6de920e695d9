#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "simshap/coalition.hpp"

#include <cmath>
#include <stdexcept>

using namespace simshap;

TEST_CASE("kernel weights at small dimensions match hand-computed values") {
    // (d - 1) / (C(d, k) * k * (d - k))
    CHECK(shapleyKernelWeight(3, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(shapleyKernelWeight(3, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(shapleyKernelWeight(4, 1) == doctest::Approx(1.0 / 4.0).epsilon(1e-15));
    CHECK(shapleyKernelWeight(4, 2) == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
    CHECK(shapleyKernelWeight(4, 3) == doctest::Approx(1.0 / 4.0).epsilon(1e-15));
}

TEST_CASE("kernel weight is symmetric in k and d - k") {
    for (int d = 2; d <= 20; ++d)
        for (int k = 1; k < d; ++k)
            CHECK(shapleyKernelWeight(d, k) ==
                  doctest::Approx(shapleyKernelWeight(d, d - k)).epsilon(1e-13));
}

TEST_CASE("kernel weight rejects the empty and full coalitions") {
    CHECK_THROWS_AS(shapleyKernelWeight(5, 0), std::domain_error);
    CHECK_THROWS_AS(shapleyKernelWeight(5, 5), std::domain_error);
}

TEST_CASE("log binomial agrees with exact small cases") {
    CHECK(std::exp(logBinomial(10, 3)) == doctest::Approx(120.0).epsilon(1e-12));
    CHECK(std::exp(logBinomial(6, 0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::exp(logBinomial(6, 6)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(logBinomial(52, 17) == doctest::Approx(logBinomial(52, 35)).epsilon(1e-13));
}

TEST_CASE("coalition round-trips through its index") {
    for (std::uint64_t idx = 0; idx < 32; ++idx) {
        const Coalition z = Coalition::fromIndex(idx, 5);
        CHECK(z.index() == idx);
        CHECK(z.dimension() == 5);
    }
}

TEST_CASE("fromIndex sets exactly the bits of the index, bit i at feature i") {
    const Coalition z = Coalition::fromIndex(0b101, 3);
    CHECK(z.size() == 2);
    CHECK(z.contains(0));
    CHECK_FALSE(z.contains(1));
    CHECK(z.contains(2));
    CHECK(z.indicator()[0] == 1.0);
    CHECK(z.indicator()[1] == 0.0);
    CHECK(z.indicator()[2] == 1.0);
}

TEST_CASE("complement flips every feature") {
    const Coalition z = Coalition::fromIndex(0b0110, 4);
    const Coalition zc = z.complement();
    CHECK(zc.index() == 0b1001);
    CHECK(z.size() + zc.size() == 4);
}

TEST_CASE("indicator entries must be exactly 0 or 1") {
    Eigen::VectorXd bad(3);
    bad << 1.0, 0.5, 0.0;
    CHECK_THROWS_AS(Coalition{bad}, std::invalid_argument);
}

TEST_CASE("enumeration is capped") {
    CHECK_THROWS_AS(Coalition::fromIndex(0, kEnumerationCap + 1), std::invalid_argument);
    CHECK_THROWS_AS(Coalition::fromIndex(1ULL << 5, 5), std::invalid_argument);
    CHECK_NOTHROW(Coalition::fromIndex(0, kEnumerationCap));
}
