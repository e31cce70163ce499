#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssk {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Kahan-compensated accumulator for the long linear statistics.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

inline double kahan_total(const std::vector<double>& xs) {
    KahanSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;  // unbiased
    std::size_t n = 0;
};

inline MeanVar mean_var(const std::vector<double>& xs) {
    MeanVar mv;
    mv.n = xs.size();
    if (xs.empty()) return mv;
    KahanSum s;
    for (double x : xs) s.add(x);
    mv.mean = s.value() / static_cast<double>(xs.size());
    if (xs.size() < 2) return mv;
    KahanSum q;
    for (double x : xs) q.add((x - mv.mean) * (x - mv.mean));
    mv.var = q.value() / static_cast<double>(xs.size() - 1);
    return mv;
}

inline double median_of_sorted(const std::vector<double>& sorted) {
    const std::size_t n = sorted.size();
    if (n == 0) throw error("median of empty sample");
    return (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

constexpr double kPi = 3.14159265358979323846264338327950288;

}  // namespace ssk
