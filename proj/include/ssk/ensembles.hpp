#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ssk/common.hpp"
#include "ssk/laws.hpp"
#include "ssk/rng.hpp"

namespace ssk {

// Full description of a disorder matrix law. alpha = 1 is the complex
// (GUE-class) symmetry, alpha = 2 the real (GOE-class) one.
struct EnsembleSpec {
    int alpha = 2;
    int n = 0;
    EntryLaw entry_law = EntryLaw::gaussian;
    // Variance of the unscaled diagonal entries xi_ii. One value = constant
    // profile; n values = per-index profile. 0 reproduces the zero-diagonal
    // SSK convention. Default (empty) is the GOE/GUE value alpha.
    std::vector<double> diag_variance;
    double spike_j = 0.0;
    std::vector<double> spike_vector;  // empty = "uniform", all n^{-1/2}

    void validate() const {
        if (alpha != 1 && alpha != 2) throw error("EnsembleSpec: alpha must be 1 or 2");
        if (n < 1) throw error("EnsembleSpec: n must be positive");
        if (!(spike_j >= 0.0) || spike_j >= 1.0)
            throw error("EnsembleSpec: spike_j must lie in [0,1) (sub-critical)");
        if (!diag_variance.empty() && diag_variance.size() != 1 &&
            diag_variance.size() != static_cast<std::size_t>(n))
            throw error("EnsembleSpec: diag_variance must be scalar or length n");
        for (double v : diag_variance)
            if (!(v >= 0.0)) throw error("EnsembleSpec: diag_variance entries must be >= 0");
        if (!spike_vector.empty()) {
            if (spike_vector.size() != static_cast<std::size_t>(n))
                throw error("EnsembleSpec: spike_vector must have length n");
            KahanSum norm2;
            for (double v : spike_vector) norm2.add(v * v);
            if (std::abs(norm2.value() - 1.0) > 1e-12)
                throw error("EnsembleSpec: spike_vector must be unit norm within 1e-12");
        }
    }

    double diag_variance_at(int i) const {
        if (diag_variance.empty()) return static_cast<double>(alpha);
        if (diag_variance.size() == 1) return diag_variance[0];
        return diag_variance[static_cast<std::size_t>(i)];
    }

    double spike_at(int i) const {
        if (spike_vector.empty()) return 1.0 / std::sqrt(static_cast<double>(n));
        return spike_vector[static_cast<std::size_t>(i)];
    }
};

inline void to_json(nlohmann::json& j, const EnsembleSpec& s) {
    j = nlohmann::json{{"alpha", s.alpha},
                       {"n", s.n},
                       {"entry_law", to_string(s.entry_law)},
                       {"spike_j", s.spike_j}};
    if (s.diag_variance.empty())
        j["diag_variance"] = static_cast<double>(s.alpha);
    else if (s.diag_variance.size() == 1)
        j["diag_variance"] = s.diag_variance[0];
    else
        j["diag_variance"] = s.diag_variance;
    if (s.spike_vector.empty())
        j["spike_vector"] = "uniform";
    else
        j["spike_vector"] = s.spike_vector;
}

inline void from_json(const nlohmann::json& j, EnsembleSpec& s) {
    s.alpha = j.at("alpha").get<int>();
    s.n = j.at("n").get<int>();
    s.entry_law = entry_law_from_string(j.value("entry_law", std::string("gaussian")));
    s.diag_variance.clear();
    if (j.contains("diag_variance")) {
        if (j["diag_variance"].is_number())
            s.diag_variance = {j["diag_variance"].get<double>()};
        else
            s.diag_variance = j["diag_variance"].get<std::vector<double>>();
    }
    s.spike_j = j.value("spike_j", 0.0);
    s.spike_vector.clear();
    if (j.contains("spike_vector") && !j["spike_vector"].is_string())
        s.spike_vector = j["spike_vector"].get<std::vector<double>>();
    s.validate();
}

// Tridiagonal beta-ensemble form, already divided by sqrt(N). The chi
// degrees of freedom grow toward the bottom-right corner, so the top
// eigenvalue lives in the bottom-right minor.
struct TridiagonalMatrix {
    int n = 0;
    int alpha = 2;
    std::vector<double> diag;     // a_1..a_N / sqrt(N)
    std::vector<double> offdiag;  // b_1..b_{N-1} / sqrt(N), strictly positive

    void validate() const {
        if (diag.size() != static_cast<std::size_t>(n) ||
            offdiag.size() + 1 != static_cast<std::size_t>(n))
            throw error("TridiagonalMatrix: inconsistent lengths");
        for (double b : offdiag)
            if (!(b > 0.0)) throw error("TridiagonalMatrix: offdiag entries must be positive");
    }
};

// a_i ~ N(0, alpha), b_i ~ chi(2i/alpha)/sqrt(2/alpha), all divided by
// sqrt(N). Spectrum is distributed as scaled GUE (alpha=1) or GOE (alpha=2).
inline TridiagonalMatrix sample_tridiag(int alpha, int n, const SeedPlan& plan) {
    if (alpha != 1 && alpha != 2) throw error("sample_tridiag: alpha must be 1 or 2");
    if (n < 2) throw error("sample_tridiag: n must be >= 2");
    Rng rng = plan.rng();
    TridiagonalMatrix m;
    m.n = n;
    m.alpha = alpha;
    m.diag.resize(n);
    m.offdiag.resize(n - 1);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    const double sqrt_alpha = std::sqrt(static_cast<double>(alpha));
    const double chi_scale = std::sqrt(static_cast<double>(alpha) / 2.0);  // 1/sqrt(2/alpha)
    for (int i = 0; i < n; ++i) m.diag[i] = sqrt_alpha * rng.normal() * inv_sqrt_n;
    for (int i = 1; i < n; ++i) {
        const double dof = 2.0 * static_cast<double>(i) / alpha;
        double b;
        do { b = chi_scale * rng.chi(dof); } while (b == 0.0);
        m.offdiag[i - 1] = b * inv_sqrt_n;
    }
    return m;
}

// Exact rank-one equivalence for Gaussian ensembles: W_N + J vv* has the
// same spectral law as the tridiagonal form with J added at the corner
// adjacent to the largest chi weights. Valid for any unit v by
// orthogonal/unitary invariance; Gaussian entry law only.
inline TridiagonalMatrix sample_tridiag_spiked(int alpha, int n, double j_spike,
                                               const SeedPlan& plan) {
    if (!(j_spike >= 0.0) || j_spike >= 1.0)
        throw error("sample_tridiag_spiked: spike must lie in [0,1)");
    TridiagonalMatrix m = sample_tridiag(alpha, n, plan);
    m.diag.back() += j_spike;
    return m;
}

// Bottom-right l x l block.
inline TridiagonalMatrix corner_minor(const TridiagonalMatrix& m, int l) {
    if (l < 1 || l > m.n) throw error("corner_minor: l out of range");
    TridiagonalMatrix c;
    c.n = l;
    c.alpha = m.alpha;
    c.diag.assign(m.diag.end() - l, m.diag.end());
    if (l > 1) c.offdiag.assign(m.offdiag.end() - (l - 1), m.offdiag.end());
    return c;
}

struct DenseSym {
    int n = 0;
    std::vector<double> a;  // column-major n*n
    double& at(int i, int j) { return a[static_cast<std::size_t>(j) * n + i]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(j) * n + i]; }
};

struct DenseHerm {
    int n = 0;
    std::vector<std::complex<double>> a;
    std::complex<double>& at(int i, int j) { return a[static_cast<std::size_t>(j) * n + i]; }
    std::complex<double> at(int i, int j) const { return a[static_cast<std::size_t>(j) * n + i]; }
};

using DenseMatrix = std::variant<DenseSym, DenseHerm>;

// W_{J,N} = J vv* + W_N, real symmetric. Conjugate symmetry is enforced by
// mirroring the upper triangle, so M = M^T holds bit-exactly.
inline DenseSym sample_dense_sym(const EnsembleSpec& spec, const SeedPlan& plan) {
    spec.validate();
    if (spec.alpha != 2) throw error("sample_dense_sym: alpha must be 2");
    const int n = spec.n;
    Rng rng = plan.rng();
    DenseSym w;
    w.n = n;
    w.a.assign(static_cast<std::size_t>(n) * n, 0.0);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) {
        w.at(i, i) = law_sample(spec.entry_law, spec.diag_variance_at(i), rng) * inv_sqrt_n +
                     spec.spike_j * spec.spike_at(i) * spec.spike_at(i);
        for (int j = i + 1; j < n; ++j) {
            const double x = law_sample(spec.entry_law, 1.0, rng) * inv_sqrt_n +
                             spec.spike_j * spec.spike_at(i) * spec.spike_at(j);
            w.at(i, j) = x;
            w.at(j, i) = x;
        }
    }
    return w;
}

// Hermitian case; Re and Im of each off-diagonal entry are independent with
// variance 1/2, the diagonal is real.
inline DenseHerm sample_dense_herm(const EnsembleSpec& spec, const SeedPlan& plan) {
    spec.validate();
    if (spec.alpha != 1) throw error("sample_dense_herm: alpha must be 1");
    const int n = spec.n;
    Rng rng = plan.rng();
    DenseHerm w;
    w.n = n;
    w.a.assign(static_cast<std::size_t>(n) * n, {0.0, 0.0});
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) {
        w.at(i, i) = law_sample(spec.entry_law, spec.diag_variance_at(i), rng) * inv_sqrt_n +
                     spec.spike_j * spec.spike_at(i) * spec.spike_at(i);
        for (int j = i + 1; j < n; ++j) {
            const double re = law_sample(spec.entry_law, 0.5, rng);
            const double im = law_sample(spec.entry_law, 0.5, rng);
            const std::complex<double> x =
                std::complex<double>(re, im) * inv_sqrt_n +
                std::complex<double>(spec.spike_j * spec.spike_at(i) * spec.spike_at(j), 0.0);
            w.at(i, j) = x;
            w.at(j, i) = std::conj(x);
        }
    }
    return w;
}

inline DenseMatrix sample_dense(const EnsembleSpec& spec, const SeedPlan& plan) {
    if (spec.alpha == 2) return sample_dense_sym(spec, plan);
    return sample_dense_herm(spec, plan);
}

// Seeded random unit vector, for tests that stress a non-uniform spike.
inline std::vector<double> random_unit_vector(int n, const SeedPlan& plan) {
    Rng rng = plan.rng(/*salt=*/0x7e57);
    std::vector<double> v(n);
    double norm2 = 0.0;
    for (auto& x : v) {
        x = rng.normal();
        norm2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv;
    return v;
}

}  // namespace ssk
