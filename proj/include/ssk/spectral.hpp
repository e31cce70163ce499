#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#ifndef lapack_complex_double
#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <json.hpp>

#include "ssk/common.hpp"
#include "ssk/ensembles.hpp"

namespace ssk {

enum class SpectrumSource { full_tridiag, full_dense, corner_minor };

inline std::string to_string(SpectrumSource s) {
    switch (s) {
        case SpectrumSource::full_tridiag: return "full_tridiag";
        case SpectrumSource::full_dense: return "full_dense";
        case SpectrumSource::corner_minor: return "corner_minor";
    }
    throw error("bad spectrum source");
}

// Eigenvalues in descending order plus provenance.
struct Spectrum {
    std::vector<double> values;  // lambda_1 >= ... , descending
    SpectrumSource source = SpectrumSource::full_tridiag;
    int n = 0;        // dimension of the originating matrix
    int corner_l = 0; // minor size when source == corner_minor

    double top() const {
        if (values.empty()) throw error("Spectrum: empty");
        return values.front();
    }
    double gap() const {
        if (values.size() < 2) throw error("Spectrum: need two eigenvalues for a gap");
        return values[0] - values[1];
    }
    void validate() const {
        for (std::size_t j = 1; j < values.size(); ++j)
            if (values[j - 1] < values[j]) throw error("Spectrum: not descending");
    }
};

inline void to_json(nlohmann::json& j, const Spectrum& s) {
    j = nlohmann::json{{"values", s.values},
                       {"source", to_string(s.source)},
                       {"n", s.n}};
    if (s.source == SpectrumSource::corner_minor) j["corner_l"] = s.corner_l;
}

// ---------------------------------------------------------------------------
// Eigensolvers

// All N eigenvalues of the tridiagonal form (LAPACK dsterf behind the
// contract: relative error <= O(eps)*||M||, descending order).
inline Spectrum eig_full(const TridiagonalMatrix& m) {
    m.validate();
    std::vector<double> d = m.diag;
    std::vector<double> e = m.offdiag;
    const lapack_int info = LAPACKE_dsterf(m.n, d.data(), e.empty() ? nullptr : e.data());
    if (info != 0)
        throw error("eig_full: eigenvalue " + std::to_string(info) + " failed to converge");
    std::sort(d.begin(), d.end(), std::greater<double>());
    return Spectrum{std::move(d), SpectrumSource::full_tridiag, m.n, 0};
}

inline Spectrum eig_dense(const DenseSym& w) {
    std::vector<double> a = w.a;
    std::vector<double> vals(w.n);
    const lapack_int info =
        LAPACKE_dsyev(LAPACK_COL_MAJOR, 'N', 'U', w.n, a.data(), w.n, vals.data());
    if (info != 0) throw error("eig_dense: dsyev failed, info=" + std::to_string(info));
    std::sort(vals.begin(), vals.end(), std::greater<double>());
    return Spectrum{std::move(vals), SpectrumSource::full_dense, w.n, 0};
}

inline Spectrum eig_dense(const DenseHerm& w) {
    std::vector<std::complex<double>> a = w.a;
    std::vector<double> vals(w.n);
    const lapack_int info =
        LAPACKE_zheev(LAPACK_COL_MAJOR, 'N', 'U', w.n, a.data(), w.n, vals.data());
    if (info != 0) throw error("eig_dense: zheev failed, info=" + std::to_string(info));
    std::sort(vals.begin(), vals.end(), std::greater<double>());
    return Spectrum{std::move(vals), SpectrumSource::full_dense, w.n, 0};
}

inline Spectrum eig_dense(const DenseMatrix& w) {
    return std::visit([](const auto& m) { return eig_dense(m); }, w);
}

// Number of eigenvalues of the tridiagonal matrix strictly below x, by the
// LDL^T pivot sign count.
inline int sturm_count_below(const std::vector<double>& d, const std::vector<double>& e,
                             double x) {
    int count = 0;
    double q = 1.0;
    const double tiny = 1e-300;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double off2 = (k == 0) ? 0.0 : e[k - 1] * e[k - 1];
        q = d[k] - x - off2 / q;
        if (q == 0.0) q = -tiny;
        if (q < 0.0) ++count;
    }
    return count;
}

// Top k eigenvalues of the bottom-right l x l minor by Sturm bisection.
// With l = N this is the full matrix; interlacing makes the corner value a
// lower bound on the full one.
inline Spectrum top_eigs_corner(const TridiagonalMatrix& m, int l, int k) {
    if (k < 1 || k > l || l > m.n) throw error("top_eigs_corner: need k <= l <= N");
    const TridiagonalMatrix c = (l == m.n) ? m : corner_minor(m, l);
    // Gershgorin bounds
    double lo = c.diag[0], hi = c.diag[0];
    for (int i = 0; i < c.n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(c.offdiag[i - 1]);
        if (i < c.n - 1) r += std::abs(c.offdiag[i]);
        lo = std::min(lo, c.diag[i] - r);
        hi = std::max(hi, c.diag[i] + r);
    }
    Spectrum out;
    out.source = SpectrumSource::corner_minor;
    out.n = m.n;
    out.corner_l = l;
    out.values.reserve(k);
    double upper = hi;
    for (int j = 1; j <= k; ++j) {
        double a = lo, b = upper;
        for (int it = 0; it < 120 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
            const double mid = 0.5 * (a + b);
            const int above = c.n - sturm_count_below(c.diag, c.offdiag, mid);
            if (above >= j)
                a = mid;
            else
                b = mid;
        }
        out.values.push_back(0.5 * (a + b));
        upper = b;  // lambda_{j+1} <= lambda_j
    }
    return out;
}

// l = min(n, ceil(multiplier * n^{1/3})); the conservative flag uses the
// proof-grade 2 n^{1/3} log^3 n instead of the practical multiplier.
inline int choose_corner_size(int n, double multiplier = 10.0, bool conservative = false) {
    if (n < 8) throw error("choose_corner_size: n must be >= 8");
    const double n13 = std::cbrt(static_cast<double>(n));
    double l = conservative ? 2.0 * n13 * std::pow(std::log(static_cast<double>(n)), 3)
                            : multiplier * n13;
    return std::min(n, static_cast<int>(std::ceil(l)));
}

// ---------------------------------------------------------------------------
// Semicircle law

// Decaying branch of the semicircle Stieltjes transform, m^2 + z m + 1 = 0.
// Rationalized form m = -2/(z + sqrt(z^2-4)): no cancellation at large |z|.
// The edge points z = +-2 are fine (m(2) = -1, m(-2) = 1); only the open
// bulk has no real branch.
inline double stieltjes_sc(double z) {
    if (z > -2.0 && z < 2.0)
        throw error("stieltjes_sc: real branch undefined inside (-2, 2)");
    const double s = std::sqrt(z * z - 4.0);
    return z >= 2.0 ? -2.0 / (z + s) : -2.0 / (z - s);
}

inline std::complex<double> stieltjes_sc(std::complex<double> z) {
    if (z.imag() == 0.0) return {stieltjes_sc(z.real()), 0.0};
    // sqrt(z-2)*sqrt(z+2) keeps the cut on [-2,2] and ~ z at infinity
    const std::complex<double> s = std::sqrt(z - 2.0) * std::sqrt(z + 2.0);
    return -2.0 / (z + s);
}

inline double semicircle_cdf(double x) {
    if (x <= -2.0) return 0.0;
    if (x >= 2.0) return 1.0;
    return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * kPi) + std::asin(0.5 * x) / kPi;
}

// ---------------------------------------------------------------------------
// Linear statistics

// sum_j log|E - lambda_j|, compensated.
inline double log_det_stat(const Spectrum& s, double E) {
    KahanSum acc;
    for (double lam : s.values) {
        const double d = E - lam;
        if (d == 0.0) throw error("log_det_stat: E coincides with an eigenvalue");
        acc.add(std::log(std::abs(d)));
    }
    return acc.value();
}

// Same statistic straight from the tridiagonal form: det(T - E I) = prod q_k
// of the LDL^T pivots, one O(N) pass and no eigensolve. Also reports the
// number of eigenvalues above E (pivot sign count).
struct LogDetPivots {
    double log_abs_det = 0.0;
    int count_above = 0;
};

inline LogDetPivots log_det_pivots(const TridiagonalMatrix& m, double E) {
    KahanSum acc;
    int below = 0;
    double q = 1.0;
    for (int k = 0; k < m.n; ++k) {
        const double off2 = (k == 0) ? 0.0 : m.offdiag[k - 1] * m.offdiag[k - 1];
        q = m.diag[k] - E - off2 / q;
        if (q == 0.0) throw error("log_det_pivots: zero pivot");
        if (q < 0.0) ++below;  // pivots of T - E I; negatives count eigs < E
        acc.add(std::log(std::abs(q)));
    }
    return {acc.value(), m.n - below};
}

// (1/N) sum_j (gamma - lambda_j)^{-l}; needs gamma above the spectrum.
inline double inverse_moment(const Spectrum& s, double gamma, int l) {
    if (l < 1) throw error("inverse_moment: l must be >= 1");
    if (!(gamma > s.top())) throw error("inverse_moment: gamma must exceed lambda_1");
    KahanSum acc;
    for (double lam : s.values) acc.add(std::pow(gamma - lam, -l));
    return acc.value() / static_cast<double>(s.values.size());
}

// lambda_1-centered variant, (1/N) sum_{j>=2} (lambda_1 - lambda_j)^{-l}.
inline double inverse_moment_top(const Spectrum& s, int l) {
    if (l < 1) throw error("inverse_moment_top: l must be >= 1");
    if (s.values.size() < 2) throw error("inverse_moment_top: need N >= 2");
    const double top = s.values.front();
    KahanSum acc;
    for (std::size_t j = 1; j < s.values.size(); ++j) {
        const double d = top - s.values[j];
        if (d == 0.0) throw error("inverse_moment_top: degenerate top gap");
        acc.add(std::pow(d, -l));
    }
    return acc.value() / static_cast<double>(s.values.size());
}

// G^{(l)}(z) = beta [l=1] + (-1)^l (l-1)!/N sum (z - lambda_j)^{-l}, z > lambda_1.
inline double g_derivative(const Spectrum& s, double beta, double z, int l) {
    if (l < 1) throw error("g_derivative: l must be >= 1");
    if (!(z > s.top())) throw error("g_derivative: z must exceed lambda_1");
    double fact = 1.0;
    for (int i = 2; i < l; ++i) fact *= i;
    const double c_l = ((l % 2 == 0) ? 1.0 : -1.0) * fact;
    KahanSum acc;
    for (double lam : s.values) acc.add(std::pow(z - lam, -l));
    return (l == 1 ? beta : 0.0) + c_l * acc.value() / static_cast<double>(s.values.size());
}

// #{j : lambda_j >= E} on the descending array.
inline int counting(const Spectrum& s, double E) {
    auto it = std::partition_point(s.values.begin(), s.values.end(),
                                   [E](double lam) { return lam >= E; });
    return static_cast<int>(it - s.values.begin());
}

// Scaled edge observables of one replica.
struct EdgeObservables {
    double xi2 = 0.0;    // N^{2/3}(lambda_1 - 2)
    double gap = 0.0;    // N^{2/3}(lambda_1 - lambda_2)
    double theta = 0.0;  // gap/2
    std::vector<int> counts;  // #{lambda_j >= 2 - x N^{-2/3}} at the thresholds
    std::vector<double> thresholds;
};

inline EdgeObservables edge_observables(const Spectrum& s,
                                        const std::vector<double>& thresholds = {1, 2, 5, 10}) {
    EdgeObservables e;
    const double n23 = std::pow(static_cast<double>(s.n), 2.0 / 3.0);
    e.xi2 = n23 * (s.values[0] - 2.0);
    e.gap = n23 * s.gap();
    e.theta = 0.5 * e.gap;
    e.thresholds = thresholds;
    for (double x : thresholds) e.counts.push_back(counting(s, 2.0 - x / n23));
    return e;
}

// ---------------------------------------------------------------------------
// O(N) log-determinant recursion at the shifted edge point

// Deterministic coefficients of the recursion at theta_N = 1 + N^{-2/3} sigma_bar/2,
// sigma_bar = (log log N)^3. Identities r_i + m_i = 2 and m_i r_i = (i-1)/(N theta^2)
// hold exactly.
struct RecursionCoeffs {
    double sigma_bar = 0.0;
    double theta = 0.0;
    std::vector<double> r, m, gamma;  // index i-1 holds r_i etc., i = 1..N
};

inline RecursionCoeffs recursion_coeffs(int n) {
    if (n < 3) throw error("recursion_coeffs: n must be >= 3");
    RecursionCoeffs c;
    const double nn = static_cast<double>(n);
    c.sigma_bar = std::pow(std::log(std::log(nn)), 3);
    c.theta = 1.0 + 0.5 * c.sigma_bar / std::pow(nn, 2.0 / 3.0);
    c.r.resize(n);
    c.m.resize(n);
    c.gamma.resize(n);
    const double denom = nn * c.theta * c.theta;
    for (int i = 1; i <= n; ++i) {
        const double s = std::sqrt(1.0 - (i - 1) / denom);
        c.r[i - 1] = 1.0 + s;
        c.m[i - 1] = 1.0 - s;
        c.gamma[i - 1] = c.m[i - 1] / c.r[i - 1];
    }
    return c;
}

// Output of the single-pass recursion: the estimate of
// sum_i log|2 + N^{-2/3} sigma_bar - mu_i| (shifted) and the shift-removed
// value at E = 2.
struct LogDetRecursionResult {
    double shifted = 0.0;
    double at_two = 0.0;
    double sum_l = 0.0;
    double sigma_bar = 0.0;
    double theta = 0.0;
    double shifted_point = 0.0;  // 2 + N^{-2/3} sigma_bar
};

// Requires a Gaussian-law tridiagonal sample: the chi^2 centering of the
// c_i coefficients is baked into the recursion.
inline LogDetRecursionResult log_det_recursion(const TridiagonalMatrix& t) {
    const int n = t.n;
    const RecursionCoeffs c = recursion_coeffs(n);
    const double nn = static_cast<double>(n);
    const double sqrt_n = std::sqrt(nn);
    KahanSum sum_l;
    double l_prev = 0.0;
    double a_prev_term = 0.0;  // c_{i-1} / (theta r_{i-1})
    for (int i = 1; i <= n; ++i) {
        const double a_i = t.diag[i - 1] * sqrt_n;  // unscaled
        double xi = a_i / (sqrt_n * c.theta * c.r[i - 1]);
        if (i >= 2) xi += std::sqrt(c.gamma[i - 1] / nn) * a_prev_term;
        const double l_i = xi + c.gamma[i - 1] * l_prev;
        sum_l.add(l_i);
        l_prev = l_i;
        if (i <= n - 1) {
            const double b_i = t.offdiag[i - 1] * sqrt_n;  // unscaled
            const double c_i = (b_i * b_i - i) / std::sqrt(static_cast<double>(i));
            a_prev_term = c_i / (c.theta * c.r[i - 1]);
        }
    }
    LogDetRecursionResult out;
    out.sigma_bar = c.sigma_bar;
    out.theta = c.theta;
    out.sum_l = sum_l.value();
    const double n13 = std::cbrt(nn);
    out.shifted = 0.5 * nn + n13 * c.sigma_bar -
                  (t.alpha - 1) / 6.0 * std::log(nn) - out.sum_l;
    out.at_two = out.shifted - n13 * c.sigma_bar;
    out.shifted_point = 2.0 + c.sigma_bar / (n13 * n13);
    return out;
}

// ---------------------------------------------------------------------------
// Principal eigenvector by inverse iteration

struct PrincipalEigenvector {
    std::vector<double> v;   // unit norm
    double lambda1 = 0.0;
    double early_max = 0.0;  // max |v_i| over i <= N - ceil(50 N^{1/3})
    int iterations = 0;
};

inline PrincipalEigenvector principal_eigenvector(const TridiagonalMatrix& m,
                                                  int max_iter = 50) {
    m.validate();
    const int n = m.n;
    const double lam = top_eigs_corner(m, n, 1).values[0];

    // Thomas solve of (T - sigma I) x = rhs with partial pivoting.
    const double sigma = lam;
    auto solve = [&](std::vector<double>& x) {
        std::vector<double> dl(m.offdiag), dd(n), du(m.offdiag), du2(n > 2 ? n - 2 : 0);
        for (int i = 0; i < n; ++i) dd[i] = m.diag[i] - sigma;
        std::vector<lapack_int> ipiv(n);
        lapack_int info = LAPACKE_dgttrf(n, dl.data(), dd.data(), du.data(), du2.data(),
                                         ipiv.data());
        // An exactly singular factor pivot gets nudged; inverse iteration
        // only needs the direction.
        if (info > 0) {
            dd[info - 1] = 1e-300;
            info = 0;
        }
        if (info != 0) throw error("principal_eigenvector: factorization failed");
        const lapack_int si =
            LAPACKE_dgttrs(LAPACK_COL_MAJOR, 'N', n, 1, dl.data(), dd.data(), du.data(),
                           du2.data(), ipiv.data(), x.data(), n);
        if (si != 0) throw error("principal_eigenvector: solve failed");
    };

    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    PrincipalEigenvector out;
    const double scale = std::abs(lam) + 4.0;
    for (int it = 1; it <= max_iter; ++it) {
        solve(v);
        double norm2 = 0.0;
        for (double x : v) norm2 += x * x;
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& x : v) x *= inv;
        // residual ||T v - lam v||
        double res2 = 0.0;
        for (int i = 0; i < n; ++i) {
            double y = (m.diag[i] - lam) * v[i];
            if (i > 0) y += m.offdiag[i - 1] * v[i - 1];
            if (i < n - 1) y += m.offdiag[i] * v[i + 1];
            res2 += y * y;
        }
        out.iterations = it;
        if (std::sqrt(res2) <= 1e-10 * scale) {
            if (v[n - 1] < 0.0)
                for (double& x : v) x = -x;  // fix overall sign
            out.v = std::move(v);
            out.lambda1 = lam;
            const int cut = n - static_cast<int>(std::ceil(50.0 * std::cbrt(double(n))));
            double mx = 0.0;
            for (int i = 0; i < std::min(cut, n); ++i) mx = std::max(mx, std::abs(out.v[i]));
            out.early_max = mx;
            return out;
        }
    }
    throw error("principal_eigenvector: inverse iteration did not converge");
}

}  // namespace ssk
