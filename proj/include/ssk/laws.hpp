#pragma once

#include <cmath>
#include <string>

#include "ssk/common.hpp"
#include "ssk/rng.hpp"

namespace ssk {

// Off-diagonal entry laws. Every non-Gaussian law shipped here matches the
// Gaussian reference moments (0, v, 0) exactly for the first three raw
// moments at any variance v; that is what the Lindeberg-swapping hypothesis
// of the main theorem needs.
enum class EntryLaw { gaussian, rademacher, uniform };

inline EntryLaw entry_law_from_string(const std::string& s) {
    if (s == "gaussian") return EntryLaw::gaussian;
    if (s == "rademacher") return EntryLaw::rademacher;
    if (s == "uniform" || s == "custom-moment-matched") return EntryLaw::uniform;
    throw error("unknown entry_law: " + s);
}

inline std::string to_string(EntryLaw law) {
    switch (law) {
        case EntryLaw::gaussian: return "gaussian";
        case EntryLaw::rademacher: return "rademacher";
        case EntryLaw::uniform: return "uniform";
    }
    throw error("bad entry law");
}

// Analytic k-th raw moment of the law scaled to variance v (k <= 4).
inline double law_moment(EntryLaw law, int k, double v) {
    switch (k) {
        case 1: return 0.0;
        case 2: return v;
        case 3: return 0.0;
        case 4:
            switch (law) {
                case EntryLaw::gaussian: return 3.0 * v * v;
                case EntryLaw::rademacher: return v * v;
                case EntryLaw::uniform: return 1.8 * v * v;  // E U^4 = 9/5 v^2
            }
    }
    throw error("law_moment: k out of range");
}

// One draw with mean 0 and variance v.
inline double law_sample(EntryLaw law, double v, Rng& rng) {
    const double s = std::sqrt(v);
    switch (law) {
        case EntryLaw::gaussian: return s * rng.normal();
        case EntryLaw::rademacher: return s * rng.rademacher();
        case EntryLaw::uniform: {
            // uniform on [-sqrt(3v), sqrt(3v)]
            return s * std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
        }
    }
    throw error("bad entry law");
}

}  // namespace ssk
