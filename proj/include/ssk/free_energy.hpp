#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssk/common.hpp"
#include "ssk/ensembles.hpp"
#include "ssk/quadrature.hpp"
#include "ssk/rng.hpp"
#include "ssk/spectral.hpp"

namespace ssk {

// ---------------------------------------------------------------------------
// Parametrization of the critical window

inline double beta_from_b(double b, int n) {
    if (n < 3) throw error("beta_from_b: n must be >= 3");
    const double nn = static_cast<double>(n);
    return 1.0 + b * std::sqrt(std::log(nn)) / std::cbrt(nn);
}

inline double gamma_hat(double b, int n) {
    if (n < 3) throw error("gamma_hat: n must be >= 3");
    const double nn = static_cast<double>(n);
    return 2.0 + b * b * std::log(nn) / std::pow(nn, 2.0 / 3.0);
}

// Inverse temperature parametrization beta = 1 + b N^{-1/3} sqrt(log N).
struct ModelParams {
    int alpha = 2;
    int n = 0;
    double b = 0.0;
    double beta = 1.0;       // derived
    double j_spike = 0.0;
    double gamma_hat_ = 2.0; // derived

    static ModelParams from_b(int alpha, int n, double b, double j = 0.0) {
        if (n < 2) throw error("ModelParams: n must be >= 2");
        const double nn = static_cast<double>(n);
        ModelParams p;
        p.alpha = alpha;
        p.n = n;
        p.b = b;
        p.beta = 1.0 + b * std::sqrt(std::log(nn)) / std::cbrt(nn);
        p.j_spike = j;
        p.gamma_hat_ = 2.0 + b * b * std::log(nn) / std::pow(nn, 2.0 / 3.0);
        p.validate();
        return p;
    }
    static ModelParams from_beta(int alpha, int n, double beta, double j = 0.0) {
        if (n < 2) throw error("ModelParams: n must be >= 2");
        const double nn = static_cast<double>(n);
        const double b = (beta - 1.0) * std::cbrt(nn) / std::sqrt(std::log(nn));
        return from_b(alpha, n, b, j);
    }
    void validate() const {
        if (alpha != 1 && alpha != 2) throw error("ModelParams: alpha must be 1 or 2");
        if (!(beta > 0.0)) throw error("ModelParams: beta must be positive");
        if (!(j_spike >= 0.0) || j_spike >= 1.0) throw error("ModelParams: J must lie in [0,1)");
    }
};

// ---------------------------------------------------------------------------
// Leading-order free energy, eq.-(1.5)-style branches

enum class Regime { spin_glass, paramagnetic, ferromagnetic };

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::spin_glass: return "spin_glass";
        case Regime::paramagnetic: return "paramagnetic";
        case Regime::ferromagnetic: return "ferromagnetic";
    }
    throw error("bad regime");
}

struct LeadingOrder {
    double value = 0.0;
    Regime regime = Regime::paramagnetic;
    bool boundary = false;  // on a phase boundary (adjacent branches agree there)
};

// Regime selected by max{1, 1/beta, J}; on ties the paramagnetic branch is
// returned with the boundary flag set (the branches are continuous across
// the boundaries, so the value is unambiguous).
inline LeadingOrder f_leading(double beta, double j) {
    if (!(beta > 0.0) || !(j >= 0.0)) throw error("f_leading: need beta > 0, j >= 0");
    const double inv_beta = 1.0 / beta;
    const double m = std::max({1.0, inv_beta, j});
    LeadingOrder out;
    auto spin_glass = [&] { return beta - 0.5 * std::log(beta) - 0.75; };
    auto para = [&] { return 0.25 * beta * beta; };
    auto ferro = [&] {
        return 0.5 * beta * (j + 1.0 / j) - 0.5 * std::log(beta * j) - 0.25 / (j * j) - 0.5;
    };
    const bool tie_para = (m == 1.0 && beta == 1.0) || (j > 0.0 && m == inv_beta && m == j);
    if (m == inv_beta || tie_para) {
        out.regime = Regime::paramagnetic;
        out.value = para();
        out.boundary = (inv_beta == 1.0) || (j > 0.0 && inv_beta == j);
    } else if (m == 1.0) {
        out.regime = Regime::spin_glass;
        out.value = spin_glass();
        out.boundary = (j == 1.0);
    } else {
        out.regime = Regime::ferromagnetic;
        out.value = ferro();
        out.boundary = (j == 1.0);
    }
    return out;
}

// The centered/scaled statistic of the main theorem; the b-sign picks the
// branch of F(beta) (they agree at b = 0).
inline double fluctuation_stat(double f, const ModelParams& p) {
    const double nn = static_cast<double>(p.n);
    const double logn = std::log(nn);
    const double center = (p.b >= 0.0)
                              ? p.beta - 0.5 * std::log(p.beta) - 0.75
                              : 0.25 * p.beta * p.beta;
    return nn / std::sqrt(p.alpha / 12.0 * logn) * (f - center + logn / (12.0 * nn));
}

// ---------------------------------------------------------------------------
// Contour-representation pieces

// log C_{alpha,N} = log Gamma(N/alpha) - (N/alpha - 1) log(beta N / alpha)
inline double log_c(int alpha, int n, double beta) {
    const double na = static_cast<double>(n) / alpha;
    if (na < 1.0) throw error("log_c: need n/alpha >= 1");
    return std::lgamma(na) - (na - 1.0) * std::log(beta * na);
}

// Stirling form -N(1 + log beta)/alpha + (1/2) log N, accurate to O(1)/alpha.
inline double log_c_stirling(int alpha, int n, double beta) {
    const double nn = static_cast<double>(n);
    return -nn * (1.0 + std::log(beta)) / alpha + 0.5 * std::log(nn);
}

// G(z) = beta z - (1/N) sum log(z - lambda_j). Principal branch off the real
// axis; on the axis the value is the limit from the upper half plane, so each
// eigenvalue above z contributes -i pi / N.
inline std::complex<double> g_eval(std::complex<double> z, double beta, const Spectrum& s) {
    KahanSum re, im;
    if (z.imag() == 0.0) {
        const double x = z.real();
        for (double lam : s.values) {
            const double d = x - lam;
            if (d == 0.0) throw error("g_eval: z coincides with an eigenvalue");
            re.add(std::log(std::abs(d)));
            if (d < 0.0) im.add(kPi);  // limit from above
        }
    } else {
        for (double lam : s.values) {
            const std::complex<double> d = z - lam;
            re.add(0.5 * std::log(std::norm(d)));
            im.add(std::arg(d));
        }
    }
    const double inv_n = 1.0 / static_cast<double>(s.values.size());
    return beta * z - inv_n * std::complex<double>(re.value(), im.value());
}

// Nonsingular part of G at lambda_1.
inline double g_hat(const Spectrum& s, double beta) {
    if (s.values.size() < 2) throw error("g_hat: need N >= 2");
    const double top = s.values[0];
    if (top - s.values[1] < 1e-13) throw error("g_hat: degenerate top gap");
    KahanSum acc;
    for (std::size_t j = 1; j < s.values.size(); ++j) acc.add(std::log(top - s.values[j]));
    return beta * top - acc.value() / static_cast<double>(s.values.size());
}

// ---------------------------------------------------------------------------
// Results

enum class FeMethod { vertical, keyhole, steepest_descent, residue_oracle, sphere_mc_oracle };

inline std::string to_string(FeMethod m) {
    switch (m) {
        case FeMethod::vertical: return "vertical";
        case FeMethod::keyhole: return "keyhole";
        case FeMethod::steepest_descent: return "steepest_descent";
        case FeMethod::residue_oracle: return "residue_oracle";
        case FeMethod::sphere_mc_oracle: return "sphere_mc_oracle";
    }
    throw error("bad method");
}

struct FreeEnergyResult {
    double f = 0.0;      // F_{alpha,N} = (alpha/2N) log I
    double log_i = 0.0;  // log of the full contour integral, C included
    FeMethod method = FeMethod::vertical;
    double quad_error = 0.0;  // error estimate on log_i
    bool rejected = false;
    nlohmann::json diagnostics;
};

inline void to_json(nlohmann::json& j, const FreeEnergyResult& r) {
    j = nlohmann::json{{"f", r.f},
                       {"log_i", r.log_i},
                       {"method", to_string(r.method)},
                       {"quad_error", r.quad_error},
                       {"rejected", r.rejected},
                       {"diagnostics", r.diagnostics}};
}

// ---------------------------------------------------------------------------
// Folded vertical-line integral with bent tails

// Computes (1/2 pi i) of the integral of exp(logf(z)) over the contour that
// runs up the vertical line Re z = x0 from -i inf to +i inf, with the two
// tails beyond +-iT bent 45 degrees to the upper/lower left. The bend is a
// Cauchy deformation (the region swept is pole-free, poles sit on the real
// axis), and it turns the conditionally convergent oscillatory tails into
// exponentially decaying ones. logf must satisfy logf(conj z) = conj logf(z)
// and have nonincreasing real part along the vertical line.
struct FoldedVertical {
    double value = 0.0;
    double error = 0.0;
    int evals = 0;
    double t_bend = 0.0;
    double u_ray = 0.0;
    bool converged = true;
};

template <class LogF>
FoldedVertical folded_vertical_integral(const LogF& logf, double x0, double t_scale,
                                        double decay_rate, const QuadOpts& opts) {
    // straight segment: just enough to cover the Laplace bump; the bent ray
    // carries the remainder exactly, so the bend point only balances work
    double S = 4.0;
    const double env0 = logf(std::complex<double>(x0, 1e-4 * t_scale)).real();
    while (S < 1.0e7) {
        const double e = logf(std::complex<double>(x0, t_scale * S)).real();
        if (e - env0 < std::log(1e-3)) break;
        S *= 2.0;
    }
    auto straight = [&](double sc) {
        const std::complex<double> lf = logf(std::complex<double>(x0, t_scale * sc));
        return std::exp(lf.real() - env0) * std::cos(lf.imag());
    };
    QuadResult qs = integrate_adaptive(straight, 0.0, S, opts, 1.0);

    // bent ray from x0 + i t_scale S heading upper-left
    const std::complex<double> z_bend(x0, t_scale * S);
    const std::complex<double> dir(-1.0, 1.0);
    const double env_bend = logf(z_bend).real() - env0;
    const double u_max =
        std::max(0.0, (env_bend - std::log(opts.trunc_tol)) / decay_rate) * 1.25 +
        t_scale;
    auto ray = [&](double u) {
        const std::complex<double> lf = logf(z_bend + dir * u);
        const std::complex<double> w = std::exp(lf - env0);
        return (dir * w).imag();
    };
    QuadResult qr = integrate_adaptive(ray, 0.0, u_max, opts, std::exp(env_bend));

    FoldedVertical out;
    out.value = (t_scale * qs.value + qr.value) / kPi * std::exp(env0);
    out.error = (t_scale * qs.error + qr.error) / kPi * std::exp(env0);
    out.evals = qs.evals + qr.evals;
    out.t_bend = t_scale * S;
    out.u_ray = u_max;
    out.converged = qs.converged && qr.converged;
    return out;
}

// ---------------------------------------------------------------------------
// Vertical contour through gamma = max(gamma_hat, lambda_1 + b^2 N^{-2/3})

inline FreeEnergyResult f_vertical(const Spectrum& s, const ModelParams& p,
                                   const QuadOpts& opts = {}) {
    const int n = p.n;
    const double nn = static_cast<double>(n);
    const double top = s.top();
    const double gamma =
        std::max(p.gamma_hat_, top + p.b * p.b / std::pow(nn, 2.0 / 3.0));
    if (!(gamma - top > 1e-14)) throw error("f_vertical: lambda_1 too close to the abscissa");

    std::vector<double> d(s.values.size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = gamma - s.values[j];

    KahanSum logsum;
    for (double dj : d) logsum.add(std::log(dj));
    const double g_gamma = p.beta * gamma - logsum.value() / nn;
    const double n_over_alpha = nn / p.alpha;

    // exponent (N/alpha)[G(z) - G(gamma)]; fast paths for the vertical line
    auto logf = [&](std::complex<double> z) {
        if (z.real() == gamma) {
            const double t = z.imag();
            KahanSum re, im;
            for (double dj : d) {
                const double r = t / dj;
                re.add(std::log1p(r * r));
                im.add(std::atan(r));
            }
            return std::complex<double>(-0.5 * n_over_alpha * re.value() / nn,
                                        n_over_alpha * (p.beta * t - im.value() / nn));
        }
        KahanSum re, im;
        for (std::size_t j = 0; j < d.size(); ++j) {
            const std::complex<double> r = (z - s.values[j]) / d[j];
            re.add(0.5 * std::log(std::norm(r)));
            im.add(std::arg(r));
        }
        const std::complex<double> dz = z - gamma;
        return n_over_alpha *
               (p.beta * dz - std::complex<double>(re.value(), im.value()) / nn);
    };

    // Laplace width of the negative-critical lemma: t ~ N^{-2/3} log^{1/4} N
    const double tau = std::pow(std::log(nn), 0.25) / std::pow(nn, 2.0 / 3.0);
    FoldedVertical q = folded_vertical_integral(logf, gamma, tau, n_over_alpha * p.beta, opts);

    FreeEnergyResult out;
    out.method = FeMethod::vertical;
    if (!(q.value > 0.0) || !q.converged) {
        out.rejected = true;
        out.diagnostics["failure"] =
            q.value > 0.0 ? "quadrature did not converge" : "nonpositive integral";
    }
    out.log_i = log_c(p.alpha, n, p.beta) + n_over_alpha * g_gamma +
                std::log(std::max(std::abs(q.value), 1e-300));
    out.f = p.alpha / (2.0 * nn) * out.log_i;
    out.quad_error = (q.value != 0.0) ? q.error / std::abs(q.value) : INFINITY;
    out.diagnostics["gamma"] = gamma;
    out.diagnostics["t_bend"] = q.t_bend;
    out.diagnostics["evals"] = q.evals;
    return out;
}

// ---------------------------------------------------------------------------
// Keyhole contour through mu = (lambda_1 + lambda_2)/2

struct KeyholeOpts {
    QuadOpts quad;
    bool enable_k3 = true;
    double k3_skip_threshold = 1e-12;  // skip the vertical tail when its bound is below this
};

inline FreeEnergyResult f_keyhole(const Spectrum& s, const ModelParams& p,
                                  const KeyholeOpts& kopts = {}) {
    const int n = p.n;
    const double nn = static_cast<double>(n);
    const std::vector<double>& lam = s.values;
    if (lam.size() < 2) throw error("f_keyhole: need N >= 2");
    const double top = lam[0];
    const double gap = top - lam[1];
    if (gap < 1e-13) throw error("f_keyhole: degenerate gap, resample upstream");
    const double mu = 0.5 * (top + lam[1]);
    const double ghat = g_hat(s, p.beta);
    const double n_over_alpha = nn / p.alpha;

    FreeEnergyResult out;
    out.method = FeMethod::keyhole;

    // Residue / real-segment piece, relative to exp{(N/alpha) Ghat(lambda_1)}.
    double segment = 1.0;
    double segment_err = 0.0;
    if (p.alpha == 2) {
        // I = (1/pi) int_0^{gap/2} x^{-1/2} exp{-(N/2) beta x
        //       - (1/2) sum_{j>=2} log(1 - x/(lambda_1-lambda_j))} dx,  x = u^2
        const double u_max = std::sqrt(0.5 * gap);
        auto w = [&](double u) {
            const double x = u * u;
            KahanSum acc;
            for (std::size_t j = 1; j < lam.size(); ++j)
                acc.add(std::log1p(-x / (top - lam[j])));
            return std::exp(-0.5 * nn * p.beta * x - 0.5 * acc.value());
        };
        QuadResult q = integrate_adaptive(w, 0.0, u_max, kopts.quad, 1.0);
        segment = 2.0 / kPi * q.value;
        segment_err = 2.0 / kPi * q.error;
        if (!(segment > 0.0)) throw error("f_keyhole: segment integral must be positive");
    }

    // Vertical tail through mu, folded by conjugate symmetry:
    // K = (1/pi) int_0^inf Re exp{(N/alpha)[G(mu+it) - Ghat(lambda_1)]} dt.
    double k3 = 0.0, k3_err = 0.0;
    bool k3_skipped = false;
    if (kopts.enable_k3) {
        const double theta_n = 0.5 * std::pow(nn, 2.0 / 3.0) * gap;
        const double bound =
            (p.b > 0.0) ? std::exp(-theta_n * p.b * std::sqrt(std::log(nn)) / p.alpha) : 1.0;
        if (p.b > 0.0 && bound * 1e3 < kopts.k3_skip_threshold * segment) {
            k3_skipped = true;
            out.diagnostics["k3_bound"] = bound;
        } else {
            // exponent (N/alpha)[G(z) - Ghat(lambda_1)]; Im z > 0 keeps every
            // log on the principal branch, which is the upper-half-plane
            // continuation the keyhole needs.
            auto logf3 = [&](std::complex<double> z) {
                KahanSum re, im;
                {
                    const std::complex<double> dz = z - top;
                    re.add(0.5 * std::log(std::norm(dz)));
                    im.add(std::arg(dz));
                }
                for (std::size_t j = 1; j < lam.size(); ++j) {
                    const std::complex<double> r = (z - lam[j]) / (top - lam[j]);
                    re.add(0.5 * std::log(std::norm(r)));
                    im.add(std::arg(r));
                }
                return n_over_alpha * p.beta * (z - top) -
                       std::complex<double>(re.value(), im.value()) /
                           static_cast<double>(p.alpha);
            };
            const double t_scale = std::pow(nn, -2.0 / 3.0);
            FoldedVertical q = folded_vertical_integral(logf3, mu, t_scale,
                                                        n_over_alpha * p.beta, kopts.quad);
            k3 = q.value;
            k3_err = q.error;
            out.diagnostics["k3_evals"] = q.evals;
            if (!q.converged) out.rejected = true;
        }
    }

    const double total = segment + k3;
    if (!(total > 0.0)) {
        out.rejected = true;
        out.diagnostics["failure"] = "segment + K3 not positive";
    }
    out.log_i =
        log_c(p.alpha, n, p.beta) + n_over_alpha * ghat + std::log(std::max(std::abs(total), 1e-300));
    out.f = p.alpha / (2.0 * nn) * out.log_i;
    out.quad_error = (segment_err + k3_err) / std::abs(total);
    out.diagnostics["mu"] = mu;
    out.diagnostics["segment"] = segment;
    out.diagnostics["k3"] = k3;
    out.diagnostics["k3_skipped"] = k3_skipped;
    return out;
}

// ---------------------------------------------------------------------------
// Steepest-descent contour (the b ~ 0 fallback)

// Im G(lambda_1 + i y); convex on [0, inf) with f(0) = -pi/(2N) < 0.
inline double steepest_height_fn(const Spectrum& s, double beta, double y) {
    const std::vector<double>& lam = s.values;
    const double nn = static_cast<double>(lam.size());
    KahanSum acc;
    for (std::size_t j = 1; j < lam.size(); ++j) acc.add(std::atan(y / (lam[0] - lam[j])));
    return beta * y - 0.5 * kPi / nn - acc.value() / nn;
}

// Unique positive root of Im G(lambda_1 + i y).
inline double steepest_y0(const Spectrum& s, double beta) {
    double hi = 1.0;
    int grow = 0;
    while (steepest_height_fn(s, beta, hi) < 0.0) {
        hi *= 2.0;
        if (++grow > 64) throw error("steepest_y0: root bracketing failed");
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (steepest_height_fn(s, beta, mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline FreeEnergyResult f_steepest(const Spectrum& s, const ModelParams& p,
                                   const QuadOpts& opts = {}) {
    const int n = p.n;
    const double nn = static_cast<double>(n);
    const std::vector<double>& lam = s.values;
    const double top = lam[0];
    if (lam.size() >= 2 && top - lam[1] < 1e-13)
        throw error("f_steepest: degenerate top gap");
    const double n_over_alpha = nn / p.alpha;

    auto g = [&](std::complex<double> z) { return g_eval(z, p.beta, s); };
    auto gp = [&](std::complex<double> z) {
        // G'(z) = beta - (1/N) sum 1/(z - lambda_j)
        std::complex<double> acc = 0.0;
        for (double l : lam) acc += 1.0 / (z - l);
        return p.beta - acc / nn;
    };

    const double y0 = steepest_y0(s, p.beta);

    // Real saddle x* > lambda_1: G'(x*) = 0, bracketed by G' -> -inf at
    // lambda_1+ and G' -> beta at infinity.
    double lo = top + 1e-15 * std::max(1.0, std::abs(top)), hi = top + 1.0;
    while (gp(hi).real() < 0.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (gp(std::complex<double>(mid, 0.0)).real() < 0.0 ? lo : hi) = mid;
    }
    const double x_saddle = 0.5 * (lo + hi);
    const double g_ref = g(std::complex<double>(x_saddle, 0.0)).real();

    // March the level set Im G = 0 upward in y, solving for x(y) by Newton
    // (the paper's uniqueness argument guarantees one solution per height).
    // The path starts vertically at the saddle and passes through
    // z0 = lambda_1 + i y0. The box must reach to where the integrand has
    // decayed below trunc_tol, i.e. x ~ x* - (alpha/N) log(1/trunc)/beta.
    const double box = std::abs(x_saddle) + 8.0 +
                       std::log(1.0 / opts.trunc_tol) * p.alpha / (nn * p.beta);
    auto x_of_y = [&](double y, double x_guess) {
        double x = x_guess;
        for (int it = 0; it < 80; ++it) {
            const std::complex<double> z(x, y);
            const double h = g(z).imag();
            const double dh = gp(z).imag();  // d/dx Im G = Im G'
            if (dh == 0.0) break;
            const double step = -h / dh;
            x += std::clamp(step, -0.5, 0.5);
            if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(x))) break;
        }
        if (!(std::abs(x) <= box)) throw error("f_steepest: trace left the bounding box");
        if (std::abs(g(std::complex<double>(x, y)).imag()) > 1e-8)
            throw error("f_steepest: level-set corrector did not converge");
        return x;
    };

    // Simpson accumulation of exp{(N/alpha)(G - G_ref)} dz along the trace.
    std::complex<double> integral = 0.0;
    double y = 0.0, x_prev = x_saddle;
    std::complex<double> f_prev = 1.0;  // exp(0) at the saddle
    const double y_cap = kPi / p.beta + 1.0;  // the trace asymptotes to y = pi/beta
    int steps = 0;
    double dy = std::max(y0, 1e-12) * 0.05;
    while (y < y_cap && steps < 200000) {
        double y_next = std::min(y + dy, y_cap);
        const double x_mid = x_of_y(0.5 * (y + y_next), x_prev);
        const double x_next = x_of_y(y_next, x_mid);
        const std::complex<double> z_mid(x_mid, 0.5 * (y + y_next));
        const std::complex<double> z_next(x_next, y_next);
        const std::complex<double> e_mid =
            std::exp(n_over_alpha * (g(z_mid) - g_ref));
        const std::complex<double> e_next =
            std::exp(n_over_alpha * (g(z_next) - g_ref));
        // step control: keep the exponent change per step small
        const double change = std::abs(std::log(std::max(1e-300, std::abs(e_next))) -
                                       std::log(std::max(1e-300, std::abs(f_prev))));
        if (change > 0.5 && dy > 1e-13) {
            dy *= 0.5;
            continue;
        }
        const std::complex<double> dz(x_next - x_prev, y_next - y);
        integral += dz * (f_prev + 4.0 * e_mid + e_next) / 6.0;
        y = y_next;
        x_prev = x_next;
        f_prev = e_next;
        ++steps;
        if (change < 0.1) dy *= 1.6;
        if (std::abs(e_next) < opts.trunc_tol) break;
    }
    if (y >= y_cap || steps >= 200000)
        throw error("f_steepest: trace did not decay inside the box");

    const double v = integral.imag() / kPi;  // (1/2 pi i) contour = Im(upper)/pi
    FreeEnergyResult out;
    out.method = FeMethod::steepest_descent;
    if (!(v > 0.0)) {
        out.rejected = true;
        out.diagnostics["failure"] = "nonpositive integral";
    }
    out.log_i =
        log_c(p.alpha, n, p.beta) + n_over_alpha * g_ref + std::log(std::max(std::abs(v), 1e-300));
    out.f = p.alpha / (2.0 * nn) * out.log_i;
    out.quad_error = 1e-6;  // conservative bound for the Simpson trace
    out.diagnostics["y0"] = y0;
    out.diagnostics["x_saddle"] = x_saddle;
    out.diagnostics["steps"] = steps;
    return out;
}

// ---------------------------------------------------------------------------
// Oracles

// Exact residue sum, alpha = 1 only: (1/2 pi i) contour integral of
// e^{N beta z} prod (z - lambda_j)^{-1} equals
// sum_j e^{N beta lambda_j} / prod_{k != j} (lambda_j - lambda_k).
inline FreeEnergyResult f_residue_oracle(const Spectrum& s, double beta) {
    const std::size_t n = s.values.size();
    if (n > 40) throw error("f_residue_oracle: N must be <= 40 (conditioning guard)");
    const std::vector<double>& lam = s.values;
    std::vector<long double> logmag(n);
    for (std::size_t j = 0; j < n; ++j) {
        long double acc = static_cast<long double>(beta) * n * lam[j];
        for (std::size_t k = 0; k < n; ++k) {
            if (k == j) continue;
            const double d = lam[j] - lam[k];
            if (d == 0.0) throw error("f_residue_oracle: repeated eigenvalues");
            acc -= std::log(std::fabs(static_cast<long double>(d)));
        }
        logmag[j] = acc;
    }
    long double top = logmag[0];
    for (auto v : logmag) top = std::max(top, v);
    long double sum = 0.0L, abs_sum = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
        // sign of prod_{k != j} (lambda_j - lambda_k) on a descending grid
        const long double term = std::exp(logmag[j] - top);
        const long double signed_term = (j % 2 == 0) ? term : -term;
        sum += signed_term;
        abs_sum += term;
    }
    if (!(sum > 0.0L)) throw error("f_residue_oracle: cancellation overflow");
    const double log_i_over_c = static_cast<double>(top + std::log(sum));
    const double condition = static_cast<double>(abs_sum / sum);

    FreeEnergyResult out;
    out.method = FeMethod::residue_oracle;
    out.log_i = log_c(1, static_cast<int>(n), beta) + log_i_over_c;
    out.f = out.log_i / (2.0 * static_cast<double>(n));
    out.quad_error = condition * 1e-18;
    out.diagnostics["log_i_over_c"] = log_i_over_c;
    out.diagnostics["condition"] = condition;
    out.diagnostics["ill_conditioned"] = condition > 1e6;
    return out;
}

// Direct Monte Carlo of the defining sphere integral. The spectrum overload
// averages over diag(lambda), which has the same integral as any matrix with
// that spectrum because the uniform sphere measure is rotation invariant.
struct SphereMcResult {
    FreeEnergyResult fe;
    double std_error = 0.0;  // delta-method SE on F
};

inline SphereMcResult f_sphere_mc_oracle_spectrum(const std::vector<double>& lam, int alpha,
                                                  double beta, long m_samples,
                                                  std::uint64_t seed) {
    const int n = static_cast<int>(lam.size());
    if (n > 32) throw error("f_sphere_mc_oracle: N must be <= 32 (variance guard)");
    if (m_samples < 100000) throw error("f_sphere_mc_oracle: need m_samples >= 1e5");
    Rng rng = SeedPlan{seed, 0}.rng(0x5fe);
    const double scale = static_cast<double>(n) * beta / alpha;
    // streaming log-sum-exp of w = exp(scale * u* W u) and of w^2
    double max1 = -INFINITY, sum1 = 0.0, max2 = -INFINITY, sum2 = 0.0;
    std::vector<double> g(alpha == 1 ? 2 * n : n);
    for (long it = 0; it < m_samples; ++it) {
        double norm2 = 0.0;
        for (auto& x : g) {
            x = rng.normal();
            norm2 += x * x;
        }
        double quad = 0.0;
        if (alpha == 1) {
            for (int i = 0; i < n; ++i)
                quad += lam[i] * (g[2 * i] * g[2 * i] + g[2 * i + 1] * g[2 * i + 1]);
        } else {
            for (int i = 0; i < n; ++i) quad += lam[i] * g[i] * g[i];
        }
        const double e = scale * quad / norm2;
        if (e > max1) {
            sum1 = sum1 * std::exp(max1 - e) + 1.0;
            max1 = e;
        } else {
            sum1 += std::exp(e - max1);
        }
        const double e2 = 2.0 * e;
        if (e2 > max2) {
            sum2 = sum2 * std::exp(max2 - e2) + 1.0;
            max2 = e2;
        } else {
            sum2 += std::exp(e2 - max2);
        }
    }
    const double m = static_cast<double>(m_samples);
    const double log_mean = max1 + std::log(sum1) - std::log(m);
    const double log_mean_sq = max2 + std::log(sum2) - std::log(m);
    // Var(w)/E[w]^2 / m
    const double ratio = std::exp(log_mean_sq - 2.0 * log_mean);
    const double se_log_i = std::sqrt(std::max(0.0, (ratio - 1.0) / m));

    SphereMcResult out;
    out.fe.method = FeMethod::sphere_mc_oracle;
    out.fe.log_i = log_mean;
    out.fe.f = alpha / (2.0 * n) * log_mean;
    out.fe.quad_error = se_log_i;
    out.std_error = alpha / (2.0 * n) * se_log_i;
    out.fe.diagnostics["m_samples"] = m_samples;
    out.fe.diagnostics["se_log_i"] = se_log_i;
    return out;
}

inline SphereMcResult f_sphere_mc_oracle(const DenseMatrix& w, const ModelParams& p,
                                         long m_samples, std::uint64_t seed) {
    // For a general dense matrix, evaluate u* W u directly.
    const int n = std::visit([](const auto& mm) { return mm.n; }, w);
    if (n > 32) throw error("f_sphere_mc_oracle: N must be <= 32 (variance guard)");
    if (m_samples < 100000) throw error("f_sphere_mc_oracle: need m_samples >= 1e5");
    Rng rng = SeedPlan{seed, 0}.rng(0x5fe);
    const double scale = static_cast<double>(n) * p.beta / p.alpha;
    double max1 = -INFINITY, sum1 = 0.0, max2 = -INFINITY, sum2 = 0.0;
    const bool complex_case = std::holds_alternative<DenseHerm>(w);
    std::vector<double> gr(n), gi(n);
    for (long it = 0; it < m_samples; ++it) {
        double norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            gr[i] = rng.normal();
            norm2 += gr[i] * gr[i];
            if (complex_case) {
                gi[i] = rng.normal();
                norm2 += gi[i] * gi[i];
            }
        }
        double quad = 0.0;
        if (complex_case) {
            const auto& m = std::get<DenseHerm>(w);
            for (int j = 0; j < n; ++j) {
                const std::complex<double> uj(gr[j], gi[j]);
                std::complex<double> acc = 0.0;
                for (int i = 0; i < n; ++i)
                    acc += std::conj(std::complex<double>(gr[i], gi[i])) * m.at(i, j);
                quad += (acc * uj).real();
            }
        } else {
            const auto& m = std::get<DenseSym>(w);
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i) acc += gr[i] * m.at(i, j);
                quad += acc * gr[j];
            }
        }
        const double e = scale * quad / norm2;
        if (e > max1) {
            sum1 = sum1 * std::exp(max1 - e) + 1.0;
            max1 = e;
        } else {
            sum1 += std::exp(e - max1);
        }
        const double e2 = 2.0 * e;
        if (e2 > max2) {
            sum2 = sum2 * std::exp(max2 - e2) + 1.0;
            max2 = e2;
        } else {
            sum2 += std::exp(e2 - max2);
        }
    }
    const double m = static_cast<double>(m_samples);
    const double log_mean = max1 + std::log(sum1) - std::log(m);
    const double log_mean_sq = max2 + std::log(sum2) - std::log(m);
    const double ratio = std::exp(log_mean_sq - 2.0 * log_mean);
    const double se_log_i = std::sqrt(std::max(0.0, (ratio - 1.0) / m));

    SphereMcResult out;
    out.fe.method = FeMethod::sphere_mc_oracle;
    out.fe.log_i = log_mean;
    out.fe.f = p.alpha / (2.0 * n) * log_mean;
    out.fe.quad_error = se_log_i;
    out.std_error = p.alpha / (2.0 * n) * se_log_i;
    out.fe.diagnostics["m_samples"] = m_samples;
    out.fe.diagnostics["se_log_i"] = se_log_i;
    return out;
}

}  // namespace ssk
