#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ssk {

// SplitMix64; used only to expand seeds into engine state.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

// xoshiro256** with hand-rolled samplers so that streams are reproducible
// across platforms and standard libraries (std::*_distribution is not).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
        if (s_[0] == 0 && s_[1] == 0 && s_[2] == 0 && s_[3] == 0) s_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0,1) with 53 random bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0,1); rejects exact zero so log() is safe
    double uniform_pos() {
        double u;
        do { u = uniform(); } while (u == 0.0);
        return u;
    }

    double normal() {
        // Box-Muller, cosine branch only; stateless so call order is the
        // whole story for reproducibility.
        const double u = uniform_pos();
        const double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
    }

    // Marsaglia-Tsang; any shape > 0, scale 1.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be positive");
        if (shape < 1.0) {
            const double u = uniform_pos();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // chi(k) = sqrt(Gamma(k/2, scale 2)); one code path for every k
    double chi(double dof) { return std::sqrt(2.0 * gamma(0.5 * dof)); }

    double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> s_{};
};

// Per-replica stream derivation. Streams for distinct (master_seed,
// replica_index, salt) triples are decorrelated by the SplitMix64 mixing;
// identical triples always yield the identical stream.
struct SeedPlan {
    std::uint64_t master_seed = 0;
    std::uint64_t replica_index = 0;

    std::uint64_t stream_seed(std::uint64_t salt = 0) const {
        SplitMix64 sm(master_seed);
        std::uint64_t a = sm.next();
        sm.state ^= 0xA5A5A5A55A5A5A5AULL + replica_index * 0x9E3779B97F4A7C15ULL;
        std::uint64_t b = sm.next();
        sm.state += salt * 0xD1B54A32D192ED03ULL;
        std::uint64_t c = sm.next();
        return a ^ (b + 0x165667B19E3779F9ULL) ^ (c << 1);
    }

    Rng rng(std::uint64_t salt = 0) const { return Rng(stream_seed(salt)); }
};

}  // namespace ssk
