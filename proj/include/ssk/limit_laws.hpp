#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ssk/common.hpp"
#include "ssk/ensembles.hpp"
#include "ssk/spectral.hpp"
#include "ssk/threading.hpp"

namespace ssk {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Regularized upper incomplete gamma Q(a, x); series/continued-fraction split.
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw error("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        // P(a,x) by series, Q = 1 - P
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    // Lentz continued fraction for Q
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 101; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-14) break;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

// ---------------------------------------------------------------------------
// Reference distributions

struct ReferenceDistribution {
    enum class Kind { gaussian, tw_empirical, convolution };
    Kind kind = Kind::gaussian;

    std::vector<double> sample;            // tw_empirical: sorted draws
    std::vector<double> grid_x, grid_cdf;  // convolution grid
    double c = 0.0;

    // provenance
    int alpha = 0;
    int n_internal = 0;
    long m_samples = 0;
    std::uint64_t seed = 0;

    double cdf(double x) const {
        switch (kind) {
            case Kind::gaussian:
                return norm_cdf(x);
            case Kind::tw_empirical: {
                const auto it = std::upper_bound(sample.begin(), sample.end(), x);
                return static_cast<double>(it - sample.begin()) /
                       static_cast<double>(sample.size());
            }
            case Kind::convolution: {
                if (c == 0.0) return norm_cdf(x);
                if (x <= grid_x.front()) return 0.0;
                if (x >= grid_x.back()) return 1.0;
                const auto it = std::upper_bound(grid_x.begin(), grid_x.end(), x);
                const std::size_t k = static_cast<std::size_t>(it - grid_x.begin());
                const double t = (x - grid_x[k - 1]) / (grid_x[k] - grid_x[k - 1]);
                return grid_cdf[k - 1] + t * (grid_cdf[k] - grid_cdf[k - 1]);
            }
        }
        throw error("bad reference kind");
    }

    double mean() const {
        switch (kind) {
            case Kind::gaussian: return 0.0;
            case Kind::tw_empirical: return mean_var(sample).mean;
            case Kind::convolution: return grid_moment(1);
        }
        throw error("bad reference kind");
    }
    double variance() const {
        switch (kind) {
            case Kind::gaussian: return 1.0;
            case Kind::tw_empirical: return mean_var(sample).var;
            case Kind::convolution: {
                const double m1 = grid_moment(1);
                return grid_moment(2) - m1 * m1;
            }
        }
        throw error("bad reference kind");
    }

  private:
    double grid_moment(int p) const {
        KahanSum acc;
        for (std::size_t k = 1; k < grid_x.size(); ++k) {
            const double dF = grid_cdf[k] - grid_cdf[k - 1];
            const double xm = 0.5 * (grid_x[k] + grid_x[k - 1]);
            acc.add(std::pow(xm, p) * dF);
        }
        return acc.value();
    }
};

inline ReferenceDistribution gaussian_reference() { return {}; }

// Empirical Tracy-Widom table from corner-minor edge draws: only the
// bottom-right block of the tridiagonal form is ever sampled, which makes
// n_internal = 1e5 cheap.
inline ReferenceDistribution tw_table(int alpha, int n_internal, long m_samples,
                                      std::uint64_t seed, int threads = 0) {
    if (n_internal < 10000) throw error("tw_table: n_internal must be >= 1e4");
    if (m_samples < 10000) throw error("tw_table: m_samples must be >= 1e4");
    const int l = choose_corner_size(n_internal, 10.0);
    const double nn = static_cast<double>(n_internal);
    const double inv_sqrt_n = 1.0 / std::sqrt(nn);
    const double n23 = std::pow(nn, 2.0 / 3.0);
    const double chi_scale = std::sqrt(static_cast<double>(alpha) / 2.0);
    const double sqrt_alpha = std::sqrt(static_cast<double>(alpha));

    std::vector<double> draws(static_cast<std::size_t>(m_samples));
    parallel_for(
        m_samples,
        [&](long k) {
            Rng rng = SeedPlan{seed, static_cast<std::uint64_t>(k)}.rng(0x70);
            TridiagonalMatrix t;
            t.n = l;
            t.alpha = alpha;
            t.diag.resize(l);
            t.offdiag.resize(l - 1);
            const int base = n_internal - l;  // global index of the block start
            for (int i = 0; i < l; ++i) t.diag[i] = sqrt_alpha * rng.normal() * inv_sqrt_n;
            for (int i = 1; i < l; ++i) {
                const double dof = 2.0 * static_cast<double>(base + i) / alpha;
                double b;
                do { b = chi_scale * rng.chi(dof); } while (b == 0.0);
                t.offdiag[i - 1] = b * inv_sqrt_n;
            }
            const double top = top_eigs_corner(t, l, 1).values[0];
            draws[static_cast<std::size_t>(k)] = n23 * (top - 2.0);
        },
        threads);
    std::sort(draws.begin(), draws.end());

    ReferenceDistribution out;
    out.kind = ReferenceDistribution::Kind::tw_empirical;
    out.sample = std::move(draws);
    out.alpha = alpha;
    out.n_internal = n_internal;
    out.m_samples = m_samples;
    out.seed = seed;
    return out;
}

// CDF of Z + c T with Z ~ N(0,1) independent of T ~ table: quadrature of
// Phi(x - c t) against the empirical TW measure on a 2001-node grid spanning
// [-10, 10 + 6c]. c = 0 falls back to the exact Gaussian.
inline ReferenceDistribution convolution_cdf(double c, const ReferenceDistribution& tw) {
    if (!(c >= 0.0)) throw error("convolution_cdf: c must be >= 0");
    if (tw.kind != ReferenceDistribution::Kind::tw_empirical)
        throw error("convolution_cdf: second argument must be a tw_empirical table");
    ReferenceDistribution out;
    out.kind = ReferenceDistribution::Kind::convolution;
    out.c = c;
    out.alpha = tw.alpha;
    out.n_internal = tw.n_internal;
    out.m_samples = tw.m_samples;
    out.seed = tw.seed;
    const int nodes = 2001;
    out.grid_x.resize(nodes);
    out.grid_cdf.resize(nodes);
    const double lo = -10.0, hi = 10.0 + 6.0 * c;
    // thin the table to quantile midpoints; keeps the mixture evaluation cheap
    const std::size_t stride = std::max<std::size_t>(1, tw.sample.size() / 5000);
    std::vector<double> reps;
    for (std::size_t i = stride / 2; i < tw.sample.size(); i += stride)
        reps.push_back(tw.sample[i]);
    for (int k = 0; k < nodes; ++k) {
        const double x = lo + (hi - lo) * k / (nodes - 1);
        out.grid_x[k] = x;
        if (c == 0.0) {
            out.grid_cdf[k] = norm_cdf(x);
        } else {
            KahanSum acc;
            for (double t : reps) acc.add(norm_cdf(x - c * t));
            out.grid_cdf[k] = acc.value() / static_cast<double>(reps.size());
        }
    }
    return out;
}

inline void write_tw_csv(std::ostream& os, const ReferenceDistribution& tw, int nodes = 2001) {
    os << "# tw_table alpha=" << tw.alpha << " n_internal=" << tw.n_internal
       << " m_samples=" << tw.m_samples << " seed=" << tw.seed << "\n";
    os << "x,cdf\n";
    const double lo = tw.sample.front(), hi = tw.sample.back();
    for (int k = 0; k < nodes; ++k) {
        const double x = lo + (hi - lo) * k / (nodes - 1);
        os << x << "," << tw.cdf(x) << "\n";
    }
}

// ---------------------------------------------------------------------------
// Statistical distances

struct KsReport {
    double statistic = 0.0;
    long n_samples = 0;
    double p_value = 0.0;
    double threshold = 0.0;  // 0 = no configured threshold
    bool pass = true;
};

inline KsReport ks_distance(std::vector<double> samples, const ReferenceDistribution& ref,
                            double threshold = 0.0) {
    // single-sample calls are allowed for degenerate sanity checks
    if (samples.size() < 50 && samples.size() != 1)
        throw error("ks_distance: need at least 50 samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = ref.cdf(samples[i]);
        d = std::max(d, std::max(F - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - F));
    }
    KsReport r;
    r.statistic = d;
    r.n_samples = static_cast<long>(samples.size());
    const double sn = std::sqrt(n);
    r.p_value = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
    r.threshold = threshold;
    r.pass = (threshold == 0.0) || d < threshold;
    return r;
}

inline KsReport ks_two_sample(std::vector<double> a, std::vector<double> b,
                              double threshold = 0.0) {
    if (a.empty() || b.empty()) throw error("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {  // tie: step past the tied block on both sides
            const double v = a[i];
            while (i < a.size() && a[i] == v) ++i;
            while (j < b.size() && b[j] == v) ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KsReport r;
    r.statistic = d;
    r.n_samples = static_cast<long>(a.size() + b.size());
    const double ne = std::sqrt(na * nb / (na + nb));
    r.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
    r.threshold = threshold;
    r.pass = (threshold == 0.0) || d < threshold;
    return r;
}

// Pearson correlation plus a 4x4 equiprobable-bin chi-square independence
// statistic (distribution-free under the null).
struct IndependenceReport {
    double corr = 0.0;
    double chi2 = 0.0;
    double chi2_p = 0.0;
    long m = 0;
};

inline IndependenceReport joint_independence_report(
    const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 500) throw error("joint_independence_report: need >= 500 pairs");
    const long m = static_cast<long>(pairs.size());
    std::vector<double> xs, ys;
    xs.reserve(m);
    ys.reserve(m);
    for (auto& [x, y] : pairs) {
        xs.push_back(x);
        ys.push_back(y);
    }
    const MeanVar mx = mean_var(xs), my = mean_var(ys);
    KahanSum cov;
    for (auto& [x, y] : pairs) cov.add((x - mx.mean) * (y - my.mean));
    IndependenceReport rep;
    rep.m = m;
    rep.corr = cov.value() / (m - 1) / std::sqrt(mx.var * my.var);

    auto quartiles = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return std::array<double, 3>{v[n / 4], v[n / 2], v[3 * n / 4]};
    };
    const auto qx = quartiles(xs), qy = quartiles(ys);
    auto bin = [](double v, const std::array<double, 3>& q) {
        return (v < q[0]) ? 0 : (v < q[1]) ? 1 : (v < q[2]) ? 2 : 3;
    };
    long counts[4][4] = {};
    long rows[4] = {}, cols[4] = {};
    for (auto& [x, y] : pairs) {
        const int i = bin(x, qx), j = bin(y, qy);
        ++counts[i][j];
        ++rows[i];
        ++cols[j];
    }
    double chi2 = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double e = static_cast<double>(rows[i]) * cols[j] / m;
            if (e > 0.0) chi2 += (counts[i][j] - e) * (counts[i][j] - e) / e;
        }
    rep.chi2 = chi2;
    rep.chi2_p = gamma_q(9.0 / 2.0, chi2 / 2.0);  // df = (4-1)^2
    return rep;
}

}  // namespace ssk
