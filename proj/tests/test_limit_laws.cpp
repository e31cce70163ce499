#include <catch2/catch_amalgamated.hpp>

#include "ssk/limit_laws.hpp"

#include <cmath>

using namespace ssk;

TEST_CASE("gamma_q against the erfc identity") {
    // Q(1/2, x) = erfc(sqrt(x))
    for (double x : {0.1, 1.0, 5.0, 20.0})
        REQUIRE_THAT(gamma_q(0.5, x), Catch::Matchers::WithinRel(std::erfc(std::sqrt(x)), 1e-10));
    // Q(1, x) = exp(-x)
    for (double x : {0.2, 2.0, 9.0})
        REQUIRE_THAT(gamma_q(1.0, x), Catch::Matchers::WithinRel(std::exp(-x), 1e-12));
}

TEST_CASE("kolmogorov tail is a proper survival function") {
    REQUIRE(kolmogorov_q(0.01) > 0.99999);
    double prev = 1.0;
    for (double l = 0.2; l < 3.0; l += 0.1) {
        const double q = kolmogorov_q(l);
        REQUIRE(q <= prev);
        REQUIRE(q >= 0.0);
        prev = q;
    }
    REQUIRE(kolmogorov_q(3.0) < 1e-6);
}

TEST_CASE("tracy-widom tables hit the known means") {
    // TW_1 mean -1.2065, TW_2 mean -1.7711; finite n_internal biases stay
    // inside the +-0.03 band used here
    const ReferenceDistribution t1 = tw_table(2, 30000, 20000, 42);
    REQUIRE(std::abs(t1.mean() - (-1.21)) < 0.03);
    REQUIRE(std::abs(t1.variance() - 1.61) < 0.12);
    const ReferenceDistribution t2 = tw_table(1, 30000, 20000, 42);
    REQUIRE(std::abs(t2.mean() - (-1.77)) < 0.03);
    // CDF sane
    REQUIRE(t1.cdf(-10.0) == 0.0);
    REQUIRE(t1.cdf(10.0) == 1.0);
    double prev = 0.0;
    for (double x = -6; x <= 4; x += 0.25) {
        REQUIRE(t1.cdf(x) >= prev);
        prev = t1.cdf(x);
    }
    REQUIRE_THROWS_AS(tw_table(2, 100, 20000, 1), error);
}

TEST_CASE("table stability across seeds") {
    const ReferenceDistribution a = tw_table(2, 10000, 10000, 1);
    const ReferenceDistribution b = tw_table(2, 10000, 10000, 2);
    const double ks = ks_two_sample(a.sample, b.sample).statistic;
    REQUIRE(ks < 3.0 * std::sqrt(std::log(2.0 / 0.01) / (2.0 * 10000.0)));
}

TEST_CASE("convolution reference") {
    const ReferenceDistribution tw = tw_table(2, 10000, 20000, 7);
    const ReferenceDistribution conv0 = convolution_cdf(0.0, tw);
    REQUIRE(conv0.cdf(0.0) == 0.5);
    for (std::size_t k = 0; k < conv0.grid_x.size(); k += 50)
        REQUIRE_THAT(conv0.grid_cdf[k],
                     Catch::Matchers::WithinAbs(norm_cdf(conv0.grid_x[k]), 1e-12));
    const double c = 1.8;
    const ReferenceDistribution conv = convolution_cdf(c, tw);
    REQUIRE(std::abs(conv.mean() - c * tw.mean()) < 0.02);
    const double var_target = 1.0 + c * c * tw.variance();
    REQUIRE(std::abs(conv.variance() - var_target) < 0.02 * var_target);
    REQUIRE_THROWS_AS(convolution_cdf(-1.0, tw), error);
    REQUIRE_THROWS_AS(convolution_cdf(1.0, gaussian_reference()), error);
}

TEST_CASE("ks distance basics") {
    const ReferenceDistribution gauss = gaussian_reference();
    REQUIRE_THAT(ks_distance({0.0}, gauss).statistic, Catch::Matchers::WithinAbs(0.5, 1e-12));
    std::vector<double> below(100);
    for (int i = 0; i < 100; ++i) below[i] = -100.0 - i;
    REQUIRE(ks_distance(below, gauss).statistic > 0.99);
    REQUIRE_THROWS_AS(ks_distance(std::vector<double>(10, 0.0), gauss), error);

    Rng rng(3);
    std::vector<double> sample(10000);
    for (auto& x : sample) x = rng.normal();
    const KsReport self = ks_distance(sample, gauss);
    REQUIRE(self.statistic < 0.025);
    REQUIRE(self.p_value > 0.001);
}

TEST_CASE("ks distance is invariant under common increasing transforms") {
    Rng rng(5);
    ReferenceDistribution ref;
    ref.kind = ReferenceDistribution::Kind::tw_empirical;
    ref.sample.resize(5000);
    for (auto& x : ref.sample) x = rng.normal();
    std::sort(ref.sample.begin(), ref.sample.end());
    std::vector<double> sample(777);
    for (auto& x : sample) x = 0.3 + 1.7 * rng.normal();
    const double d0 = ks_distance(sample, ref).statistic;
    // apply x -> 2x + 5 to both sides
    ReferenceDistribution ref2 = ref;
    for (auto& x : ref2.sample) x = 2.0 * x + 5.0;
    std::vector<double> sample2 = sample;
    for (auto& x : sample2) x = 2.0 * x + 5.0;
    REQUIRE_THAT(ks_distance(sample2, ref2).statistic, Catch::Matchers::WithinAbs(d0, 1e-14));
}

TEST_CASE("two-sample ks on identical and disjoint samples") {
    std::vector<double> a(500), b(500);
    Rng rng(9);
    for (auto& x : a) x = rng.normal();
    b = a;
    REQUIRE(ks_two_sample(a, b).statistic < 1e-12);
    for (auto& x : b) x += 100.0;
    REQUIRE_THAT(ks_two_sample(a, b).statistic, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("independence report on synthetic pairs") {
    std::vector<std::pair<double, double>> dep, ind;
    Rng rng(12);
    for (int i = 0; i < 5000; ++i) {
        const double x = rng.normal();
        dep.emplace_back(x, x);
        ind.emplace_back(rng.normal(), rng.normal());
    }
    const IndependenceReport d = joint_independence_report(dep);
    REQUIRE(std::abs(d.corr) > 0.999);
    REQUIRE(d.chi2_p < 1e-6);
    const IndependenceReport i = joint_independence_report(ind);
    REQUIRE(std::abs(i.corr) < 0.05);
    REQUIRE(i.chi2_p > 0.001);
    REQUIRE_THROWS_AS(joint_independence_report({{0.0, 0.0}}), error);
}

TEST_CASE("tw csv has a provenance header") {
    const ReferenceDistribution tw = tw_table(2, 10000, 10000, 5);
    std::ostringstream os;
    write_tw_csv(os, tw, 11);
    const std::string s = os.str();
    REQUIRE(s.rfind("# tw_table alpha=2", 0) == 0);
    REQUIRE(s.find("x,cdf") != std::string::npos);
}
