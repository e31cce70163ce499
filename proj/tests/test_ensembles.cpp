#include <catch2/catch_amalgamated.hpp>

#include "ssk/ensembles.hpp"
#include "ssk/limit_laws.hpp"
#include "ssk/spectral.hpp"

#include <cmath>

using namespace ssk;

TEST_CASE("tridiagonal entries carry the right laws") {
    // diag: a_i ~ N(0, alpha); offdiag: E (sqrt(N) b_i)^2 = i
    const int n = 2000;
    for (int alpha : {1, 2}) {
        double s2 = 0.0;
        const int reps = 50;
        for (int r = 0; r < reps; ++r) {
            const TridiagonalMatrix t = sample_tridiag(alpha, n, SeedPlan{100 + r, 0});
            for (double a : t.diag) s2 += a * a * n;
        }
        const double var = s2 / (static_cast<double>(n) * reps);
        REQUIRE(std::abs(var - alpha) < 0.05 * alpha);
    }
    // single-index chi moment, i = 50, alpha = 2
    double s = 0.0;
    const int m = 100000;
    Rng rng = SeedPlan{5, 0}.rng();
    for (int k = 0; k < m; ++k) {
        const double b = rng.chi(50.0);
        s += b * b;
    }
    REQUIRE(std::abs(s / m - 50.0) < 1.0);
}

TEST_CASE("EnsembleSpec validation rejects bad inputs") {
    EnsembleSpec s;
    s.alpha = 2;
    s.n = 8;
    REQUIRE_NOTHROW(s.validate());
    s.spike_j = 1.0;
    REQUIRE_THROWS_AS(s.validate(), error);
    s.spike_j = 0.3;
    s.spike_vector = std::vector<double>(8, 0.5);  // norm sqrt(2)
    REQUIRE_THROWS_AS(s.validate(), error);
    s.spike_vector.assign(8, 1.0 / std::sqrt(8.0));
    REQUIRE_NOTHROW(s.validate());
    s.alpha = 3;
    REQUIRE_THROWS_AS(s.validate(), error);
}

TEST_CASE("EnsembleSpec JSON round trip") {
    EnsembleSpec s;
    s.alpha = 1;
    s.n = 16;
    s.entry_law = EntryLaw::rademacher;
    s.diag_variance = {0.0};
    s.spike_j = 0.25;
    nlohmann::json j = s;
    REQUIRE(j["spike_vector"] == "uniform");
    const EnsembleSpec back = j.get<EnsembleSpec>();
    REQUIRE(back.alpha == s.alpha);
    REQUIRE(back.entry_law == EntryLaw::rademacher);
    REQUIRE(back.diag_variance == s.diag_variance);
    REQUIRE(back.spike_j == s.spike_j);
    REQUIRE(back.spike_vector.empty());
}

TEST_CASE("rademacher dense entries sit on the lattice") {
    EnsembleSpec s;
    s.alpha = 2;
    s.n = 10;
    s.entry_law = EntryLaw::rademacher;
    const DenseSym w = sample_dense_sym(s, SeedPlan{3, 0});
    const double unit = 1.0 / std::sqrt(10.0);
    for (int i = 0; i < 10; ++i)
        for (int j = i + 1; j < 10; ++j)
            REQUIRE(std::abs(std::abs(w.at(i, j)) - unit) < 1e-15);
}

TEST_CASE("zero diag_variance gives an exactly zero diagonal") {
    EnsembleSpec s;
    s.alpha = 2;
    s.n = 12;
    s.diag_variance = {0.0};
    const DenseSym w = sample_dense_sym(s, SeedPlan{9, 0});
    for (int i = 0; i < 12; ++i) REQUIRE(w.at(i, i) == 0.0);
}

TEST_CASE("corner spike equivalence matches the dense spiked law") {
    // Top-eigenvalue samples from the corner-spiked tridiagonal form and from
    // dense spiked GOE must be statistically indistinguishable; the dense
    // route is the defining construction, so it serves as the oracle.
    const int n = 60;
    const double j_spike = 0.5;
    const long m = 300;
    std::vector<double> tri(m), dense(m);
    for (long k = 0; k < m; ++k) {
        const TridiagonalMatrix t = sample_tridiag_spiked(2, n, j_spike, SeedPlan{400, (std::uint64_t)k});
        tri[k] = eig_full(t).values[0];
        EnsembleSpec s;
        s.alpha = 2;
        s.n = n;
        s.spike_j = j_spike;
        dense[k] = eig_dense(sample_dense_sym(s, SeedPlan{900, (std::uint64_t)k})).values[0];
    }
    const KsReport ks = ks_two_sample(tri, dense);
    INFO("two-sample KS " << ks.statistic << " p " << ks.p_value);
    REQUIRE(ks.p_value > 1e-3);
}

TEST_CASE("random unit spike vector is unit norm") {
    const auto v = random_unit_vector(500, SeedPlan{77, 0});
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    REQUIRE(std::abs(n2 - 1.0) < 1e-12);
}
