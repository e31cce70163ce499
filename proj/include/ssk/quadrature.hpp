#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "ssk/common.hpp"

namespace ssk {

struct QuadOpts {
    double rel_tol = 1e-10;    // panel refinement target, relative to the running total
    double trunc_tol = 1e-18;  // stop extending the tail below this relative modulus
    int max_evals = 200000;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // absolute error estimate
    int evals = 0;
    bool converged = true;
    double t_max = 0.0;  // where the tail was truncated
};

namespace detail {

// Gauss-Kronrod 15(7) on [-1, 1].
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kGk15WeightsK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGk15WeightsG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15(const F& f, double a, double b, double& result, double& err, int& evals) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double resk = 0.0, resg = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double x = h * kGk15Nodes[i];
        double fv;
        if (i == 7) {
            fv = f(c);
            evals += 1;
        } else {
            fv = f(c - x) + f(c + x);
            evals += 2;
        }
        resk += kGk15WeightsK[i] * fv;
        if (i % 2 == 1) resg += kGk15WeightsG[i / 2] * fv;  // Gauss-7: nodes 1,3,5 + center
    }
    result = resk * h;
    err = std::abs(resk - resg) * h;
}

}  // namespace detail

// Adaptive GK15 on [a, b]; tolerance is relative to `scale` (a caller-supplied
// magnitude hint, typically the peak of |f| times a width).
template <class F>
QuadResult integrate_adaptive(const F& f, double a, double b, const QuadOpts& opts,
                              double scale) {
    struct Panel {
        double a, b, value, err;
    };
    QuadResult out;
    int evals = 0;
    double v0, e0;
    detail::gk15(f, a, b, v0, e0, evals);
    std::vector<Panel> stack{{a, b, v0, e0}};
    double total = 0.0, total_err = 0.0;
    const double floor = 1e-320;
    while (!stack.empty()) {
        Panel p = stack.back();
        stack.pop_back();
        const double tol =
            opts.rel_tol * std::max({std::abs(total) + std::abs(p.value), scale, floor});
        if (p.err <= tol * std::max(1e-3, (p.b - p.a) / (b - a)) || evals >= opts.max_evals ||
            p.b - p.a < 1e-14 * (b - a)) {
            total += p.value;
            total_err += p.err;
            if (evals >= opts.max_evals && p.err > tol) out.converged = false;
            continue;
        }
        const double mid = 0.5 * (p.a + p.b);
        double vl, el, vr, er;
        detail::gk15(f, p.a, mid, vl, el, evals);
        detail::gk15(f, mid, p.b, vr, er, evals);
        stack.push_back({p.a, mid, vl, el});
        stack.push_back({mid, p.b, vr, er});
    }
    out.value = total;
    out.error = total_err;
    out.evals = evals;
    out.t_max = b;
    return out;
}

}  // namespace ssk
