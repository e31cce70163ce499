#include <catch2/catch_amalgamated.hpp>

#include "ssk/rng.hpp"

#include <cmath>
#include <set>

using namespace ssk;

TEST_CASE("streams are reproducible and distinct") {
    SeedPlan a{42, 0}, b{42, 0}, c{42, 1}, d{43, 0};
    REQUIRE(a.stream_seed() == b.stream_seed());
    REQUIRE(a.stream_seed() != c.stream_seed());
    REQUIRE(a.stream_seed() != d.stream_seed());
    REQUIRE(a.stream_seed(1) != a.stream_seed(2));

    Rng r1 = a.rng(), r2 = b.rng();
    for (int i = 0; i < 100; ++i) REQUIRE(r1.next_u64() == r2.next_u64());
}

TEST_CASE("uniform draws live in [0,1)") {
    Rng rng(7);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("normal sampler moments") {
    Rng rng(11);
    const int m = 200000;
    double s = 0, s2 = 0, s3 = 0;
    for (int i = 0; i < m; ++i) {
        const double x = rng.normal();
        s += x;
        s2 += x * x;
        s3 += x * x * x;
    }
    REQUIRE(std::abs(s / m) < 0.01);
    REQUIRE(std::abs(s2 / m - 1.0) < 0.02);
    REQUIRE(std::abs(s3 / m) < 0.05);
}

TEST_CASE("gamma sampler matches its mean and variance") {
    Rng rng(13);
    for (double shape : {0.5, 1.0, 3.5, 25.0}) {
        const int m = 100000;
        double s = 0, s2 = 0;
        for (int i = 0; i < m; ++i) {
            const double x = rng.gamma(shape);
            s += x;
            s2 += x * x;
        }
        const double mean = s / m;
        const double var = s2 / m - mean * mean;
        REQUIRE(std::abs(mean - shape) < 0.05 * std::max(1.0, shape));
        REQUIRE(std::abs(var - shape) < 0.08 * std::max(1.0, shape));
    }
}

TEST_CASE("chi sampler: E chi(k)^2 = k") {
    Rng rng(17);
    for (double k : {1.0, 2.0, 50.0}) {
        const int m = 100000;
        double s2 = 0;
        for (int i = 0; i < m; ++i) {
            const double x = rng.chi(k);
            s2 += x * x;
        }
        REQUIRE(std::abs(s2 / m - k) < 0.03 * std::max(1.0, k));
    }
}
