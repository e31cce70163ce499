#include <catch2/catch_amalgamated.hpp>

#include "ssk/ensembles.hpp"
#include "ssk/free_energy.hpp"
#include "ssk/quadrature.hpp"
#include "ssk/spectral.hpp"

#include <cmath>

using namespace ssk;

namespace {
Spectrum spectrum_of(std::vector<double> vals) {
    Spectrum s;
    s.values = std::move(vals);
    s.n = static_cast<int>(s.values.size());
    return s;
}
}  // namespace

TEST_CASE("parametrization of the critical window") {
    REQUIRE(beta_from_b(0.0, 1000) == 1.0);
    REQUIRE(gamma_hat(0.0, 1000) == 2.0);
    // direct formula evaluations
    REQUIRE_THAT(beta_from_b(1.0, 1000),
                 Catch::Matchers::WithinAbs(1.0 + 0.1 * std::sqrt(std::log(1000.0)), 1e-13));
    REQUIRE_THAT(gamma_hat(-1.0, 1000),
                 Catch::Matchers::WithinAbs(2.0 + 0.01 * std::log(1000.0), 1e-13));
    const ModelParams p = ModelParams::from_b(2, 1000, -1.0);
    REQUIRE_THAT(p.beta - 1.0,
                 Catch::Matchers::WithinAbs(-std::sqrt(std::log(1000.0)) / 10.0, 1e-15));
}

TEST_CASE("leading-order branches") {
    // branches agree at beta = 1
    REQUIRE_THAT(f_leading(1.0, 0.0).value, Catch::Matchers::WithinAbs(0.25, 1e-15));
    REQUIRE_THAT(f_leading(2.0, 0.0).value,
                 Catch::Matchers::WithinAbs(2.0 - 0.5 * std::log(2.0) - 0.75, 1e-15));
    REQUIRE_THAT(f_leading(1.0, 2.0).value,
                 Catch::Matchers::WithinAbs(1.25 - 0.5 * std::log(2.0) - 1.0 / 16 - 0.5, 1e-15));
    // continuity at the para/ferro boundary beta J = 1
    const double j = 1.7, beta = 1.0 / j;
    const double para = 0.25 * beta * beta;
    REQUIRE_THAT(f_leading(beta, j).value, Catch::Matchers::WithinAbs(para, 1e-14));
    REQUIRE(f_leading(beta, j).boundary);
    // continuity at the glass/ferro boundary J = 1
    const double glass = 1.4 - 0.5 * std::log(1.4) - 0.75;
    REQUIRE_THAT(f_leading(1.4, 1.0).value, Catch::Matchers::WithinAbs(glass, 1e-14));
}

TEST_CASE("log C exact and Stirling forms") {
    REQUIRE_THAT(log_c(1, 2, 1.0), Catch::Matchers::WithinAbs(-std::log(2.0), 1e-15));
    REQUIRE(log_c(2, 2, 1.0) == 0.0);
    for (int n : {1000, 10000, 100000})
        REQUIRE(std::abs(log_c(2, n, 1.0) - log_c_stirling(2, n, 1.0)) <= 2.0);
}

TEST_CASE("g_eval values and branch") {
    const Spectrum s = spectrum_of({1.0, -1.0});
    const auto g = g_eval({2.0, 0.0}, 1.0, s);
    REQUIRE_THAT(g.real(), Catch::Matchers::WithinAbs(2.0 - 0.5 * std::log(3.0), 1e-14));
    REQUIRE(g.imag() == 0.0);
    // Schwarz symmetry off the axis
    const std::complex<double> z(0.3, 1.2);
    REQUIRE(std::abs(g_eval(std::conj(z), 1.0, s) - std::conj(g_eval(z, 1.0, s))) < 1e-14);
    // between lambda_2 and lambda_1 the j=1 log picks up +i pi, so Im G gets
    // -pi/N from that term (upper-half-plane limit)
    const auto gmu = g_eval({0.0, 0.0}, 1.0, s);
    REQUIRE_THAT(gmu.imag(), Catch::Matchers::WithinAbs(-kPi / 2.0, 1e-15));
    REQUIRE_THROWS_AS(g_eval({1.0, 0.0}, 1.0, s), error);
}

TEST_CASE("g_hat closed form and guards") {
    const Spectrum s = spectrum_of({2.0, 0.0});
    REQUIRE_THAT(g_hat(s, 1.0), Catch::Matchers::WithinAbs(2.0 - 0.5 * std::log(2.0), 1e-14));
    REQUIRE_THAT(g_hat(s, 1.3) - g_hat(s, 0.7), Catch::Matchers::WithinAbs(0.6 * 2.0, 1e-13));
    REQUIRE_THROWS_AS(g_hat(spectrum_of({1.0, 1.0 - 1e-14}), 1.0), error);
}

TEST_CASE("residue oracle closed forms") {
    const Spectrum s = spectrum_of({1.0, -1.0});
    const FreeEnergyResult r = f_residue_oracle(s, 1.0);
    // two-term residue sum by hand: (e^2 - e^-2)/2 = sinh 2
    REQUIRE_THAT(r.diagnostics["log_i_over_c"].get<double>(),
                 Catch::Matchers::WithinAbs(std::log(std::sinh(2.0)), 1e-12));
    // with C = 1/(2 beta): I = sinh(2 beta)/(2 beta), the direct sphere integral
    for (double beta : {0.6, 1.0, 1.4}) {
        const FreeEnergyResult rb = f_residue_oracle(s, beta);
        REQUIRE_THAT(rb.log_i,
                     Catch::Matchers::WithinAbs(std::log(std::sinh(2 * beta) / (2 * beta)), 1e-12));
    }
    // three-term example by partial fractions: I/C = cosh(3) - 1
    const FreeEnergyResult r3 = f_residue_oracle(spectrum_of({1.0, 0.0, -1.0}), 1.0);
    REQUIRE_THAT(r3.diagnostics["log_i_over_c"].get<double>(),
                 Catch::Matchers::WithinAbs(std::log(std::cosh(3.0) - 1.0), 1e-12));
    // shift covariance: log I/C moves by N beta c exactly
    const FreeEnergyResult rs = f_residue_oracle(spectrum_of({1.5, -0.5}), 1.0);
    REQUIRE_THAT(rs.diagnostics["log_i_over_c"].get<double>() -
                     r.diagnostics["log_i_over_c"].get<double>(),
                 Catch::Matchers::WithinAbs(2.0 * 1.0 * 0.5, 1e-12));
    REQUIRE_THROWS_AS(f_residue_oracle(spectrum_of({1.0, 1.0}), 1.0), error);
}

TEST_CASE("sphere Monte Carlo oracle exact cases") {
    const SphereMcResult zero =
        f_sphere_mc_oracle_spectrum(std::vector<double>(6, 0.0), 2, 1.7, 100000, 4);
    REQUIRE_THAT(zero.fe.f, Catch::Matchers::WithinAbs(0.0, 1e-13));
    const SphereMcResult idm =
        f_sphere_mc_oracle_spectrum(std::vector<double>(6, 1.0), 1, 0.9, 100000, 4);
    REQUIRE_THAT(idm.fe.f, Catch::Matchers::WithinAbs(0.45, 1e-13));
    // against the closed form sinh(2)/2 at alpha=1, N=2
    const SphereMcResult mc =
        f_sphere_mc_oracle_spectrum({1.0, -1.0}, 1, 1.0, 400000, 11);
    const double exact = std::log(std::sinh(2.0) / 2.0) / 4.0;
    REQUIRE(std::abs(mc.fe.f - exact) < 3.0 * mc.std_error);
    REQUIRE_THROWS_AS(f_sphere_mc_oracle_spectrum(std::vector<double>(40, 0.0), 2, 1.0, 200000, 1),
                      error);
    REQUIRE_THROWS_AS(f_sphere_mc_oracle_spectrum({1.0, -1.0}, 1, 1.0, 1000, 1), error);
}

TEST_CASE("contour invariance against the residue oracle") {
    // alpha = 1: vertical, keyhole, steepest all reproduce the residue sum
    Rng rng(2024);
    for (int n : {2, 5, 10, 20, 30}) {
        for (int rep = 0; rep < 5; ++rep) {
            const Spectrum s = eig_full(sample_tridiag(1, n, SeedPlan{500 + n, (std::uint64_t)rep}));
            const double beta = 0.5 + rng.uniform();
            const ModelParams p = ModelParams::from_beta(1, n, beta);
            const FreeEnergyResult oracle = f_residue_oracle(s, beta);
            const FreeEnergyResult v = f_vertical(s, p);
            const FreeEnergyResult k = f_keyhole(s, p);
            INFO("n=" << n << " rep=" << rep << " beta=" << beta);
            REQUIRE_THAT(v.log_i, Catch::Matchers::WithinRel(oracle.log_i, 1e-6));
            REQUIRE_THAT(k.log_i, Catch::Matchers::WithinRel(oracle.log_i, 1e-6));
        }
    }
}

TEST_CASE("steepest descent agrees with the oracle near b = 0") {
    for (int n : {5, 15, 30}) {
        const Spectrum s = eig_full(sample_tridiag(1, n, SeedPlan{321, (std::uint64_t)n}));
        const ModelParams p = ModelParams::from_b(1, n, 0.05);
        const FreeEnergyResult oracle = f_residue_oracle(s, p.beta);
        const FreeEnergyResult st = f_steepest(s, p);
        REQUIRE_THAT(st.log_i, Catch::Matchers::WithinRel(oracle.log_i, 1e-4));
        REQUIRE(st.diagnostics["y0"].get<double>() > 0.0);
    }
}

TEST_CASE("steepest height function basics") {
    const Spectrum s = eig_full(sample_tridiag(2, 40, SeedPlan{322, 0}));
    REQUIRE_THAT(steepest_height_fn(s, 1.0, 0.0),
                 Catch::Matchers::WithinAbs(-kPi / 80.0, 1e-15));
    const double y0 = steepest_y0(s, 1.0);
    REQUIRE(y0 > 0.0);
    REQUIRE(std::abs(steepest_height_fn(s, 1.0, y0)) < 1e-12);
    // convexity bracket: f negative below the root, positive above
    REQUIRE(steepest_height_fn(s, 1.0, 0.5 * y0) < 0.0);
    REQUIRE(steepest_height_fn(s, 1.0, 2.0 * y0) > 0.0);
}

TEST_CASE("keyhole structure") {
    const Spectrum s = eig_full(sample_tridiag(1, 10, SeedPlan{323, 0}));
    const ModelParams p = ModelParams::from_beta(1, 10, 1.1);
    KeyholeOpts off;
    off.enable_k3 = false;
    const FreeEnergyResult no_k3 = f_keyhole(s, p, off);
    // alpha=1 without the tail: exactly the Cauchy residue at lambda_1
    REQUIRE_THAT(no_k3.log_i,
                 Catch::Matchers::WithinAbs(log_c(1, 10, p.beta) + 10.0 * g_hat(s, p.beta), 1e-12));
    REQUIRE_THROWS_AS(f_keyhole(spectrum_of({1.0, 1.0 - 1e-14, 0.0}), p), error);
}

TEST_CASE("vertical contour rejects an abscissa pinned to lambda_1") {
    const Spectrum s = spectrum_of({2.5, 0.0});  // lambda_1 above gamma_hat at b=0
    const ModelParams p = ModelParams::from_b(2, 2, 0.0);
    REQUIRE_THROWS_AS(f_vertical(s, p), error);
}

TEST_CASE("free energy properties across methods") {
    // eigenvalue-shift covariance: F(lambda + c) = F(lambda) + beta c / 2
    const Spectrum s = eig_full(sample_tridiag(2, 24, SeedPlan{324, 0}));
    Spectrum shifted = s;
    for (double& v : shifted.values) v += 0.41;
    const ModelParams p = ModelParams::from_beta(2, 24, 0.9);
    REQUIRE_THAT(f_vertical(shifted, p).f - f_vertical(s, p).f,
                 Catch::Matchers::WithinAbs(p.beta * 0.41 / 2.0, 1e-10));
    REQUIRE_THAT(f_keyhole(shifted, p).f - f_keyhole(s, p).f,
                 Catch::Matchers::WithinAbs(p.beta * 0.41 / 2.0, 1e-10));

    // monotonicity in beta (log-convex integrand)
    double prev = -INFINITY;
    for (double beta : {0.5, 0.8, 1.1, 1.4, 1.7}) {
        const double f = f_keyhole(s, ModelParams::from_beta(2, 24, beta)).f;
        REQUIRE(f >= prev - 1e-12);
        prev = f;
    }
}

TEST_CASE("fluctuation statistic") {
    const ModelParams p = ModelParams::from_b(2, 2000, -1.0);
    const double logn = std::log(2000.0);
    const double center = 0.25 * p.beta * p.beta - logn / (12.0 * 2000.0);
    REQUIRE_THAT(fluctuation_stat(center, p), Catch::Matchers::WithinAbs(0.0, 1e-9));
    const double slope = 2000.0 / std::sqrt(2.0 / 12.0 * logn);
    REQUIRE_THAT(fluctuation_stat(center + 1e-3, p),
                 Catch::Matchers::WithinRel(slope * 1e-3, 1e-9));
    // positive b uses the spin-glass branch
    const ModelParams q = ModelParams::from_b(2, 2000, 1.5);
    const double center_q =
        q.beta - 0.5 * std::log(q.beta) - 0.75 - logn / (12.0 * 2000.0);
    REQUIRE_THAT(fluctuation_stat(center_q, q), Catch::Matchers::WithinAbs(0.0, 1e-9));
}

TEST_CASE("quadrature engine against erf") {
    auto f = [](double x) { return std::exp(-x * x); };
    const QuadResult q = integrate_adaptive(f, 0.0, 6.0, {}, 1.0);
    REQUIRE_THAT(q.value, Catch::Matchers::WithinAbs(std::sqrt(kPi) / 2.0, 1e-12));
    REQUIRE(q.converged);
}

TEST_CASE("free energy result serializes with the contract fields") {
    const Spectrum s = eig_full(sample_tridiag(2, 16, SeedPlan{325, 0}));
    const ModelParams p = ModelParams::from_beta(2, 16, 1.0);
    const nlohmann::json j = f_keyhole(s, p);
    for (const char* key : {"f", "log_i", "method", "quad_error", "rejected"})
        REQUIRE(j.contains(key));
}
