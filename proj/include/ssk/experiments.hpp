#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ssk/common.hpp"
#include "ssk/ensembles.hpp"
#include "ssk/free_energy.hpp"
#include "ssk/limit_laws.hpp"
#include "ssk/spectral.hpp"
#include "ssk/threading.hpp"

namespace ssk {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
    std::string suite;  // transition, clt1, clt2, independence, edge,
                        // g_derivatives, corner_accuracy, eigvec_decay,
                        // stickiness, universality
    EnsembleSpec ensemble;
    std::vector<double> b_grid;
    long m_replicas = 1;
    std::uint64_t master_seed = 1;
    std::string method = "auto";  // vertical | keyhole | steepest | auto
    double corner_multiplier = 10.0;
    double clt_c = 1.0;
    std::vector<int> n_grid;  // multi-size suites; empty = {ensemble.n}
    int threads = 0;
    std::string records_path;
    std::string summary_path;

    // pilot-frozen thresholds (defaults match the acceptance criteria)
    double ks_threshold = 0.08;
    double corr_threshold = 0.05;
    double chi2_p_min = 0.01;
    double mutual_ks_threshold = 0.10;
    double control_ks_threshold = 0.06;

    // tw table provenance for suites that need the reference
    int tw_n_internal = 100000;
    long tw_m_samples = 100000;

    void validate() const {
        if (m_replicas < 1) throw error("config: m_replicas must be >= 1");
        const bool needs_b =
            suite == "transition" || suite == "universality";
        if (needs_b && b_grid.empty()) throw error("config: b_grid required for " + suite);
    }
    std::vector<int> sizes() const { return n_grid.empty() ? std::vector<int>{ensemble.n} : n_grid; }
};

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json{{"suite", c.suite},
                       {"ensemble", c.ensemble},
                       {"b_grid", c.b_grid},
                       {"m_replicas", c.m_replicas},
                       {"master_seed", c.master_seed},
                       {"method", c.method},
                       {"corner_multiplier", c.corner_multiplier},
                       {"clt_c", c.clt_c},
                       {"n_grid", c.n_grid},
                       {"threads", c.threads},
                       {"records_path", c.records_path},
                       {"summary_path", c.summary_path},
                       {"ks_threshold", c.ks_threshold},
                       {"corr_threshold", c.corr_threshold},
                       {"chi2_p_min", c.chi2_p_min},
                       {"mutual_ks_threshold", c.mutual_ks_threshold},
                       {"control_ks_threshold", c.control_ks_threshold},
                       {"tw_n_internal", c.tw_n_internal},
                       {"tw_m_samples", c.tw_m_samples}};
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    c.suite = j.at("suite").get<std::string>();
    c.ensemble = j.at("ensemble").get<EnsembleSpec>();
    c.b_grid = j.value("b_grid", std::vector<double>{});
    c.m_replicas = j.value("m_replicas", 1L);
    c.master_seed = j.value("master_seed", std::uint64_t{1});
    c.method = j.value("method", std::string("auto"));
    c.corner_multiplier = j.value("corner_multiplier", 10.0);
    c.clt_c = j.value("clt_c", 1.0);
    c.n_grid = j.value("n_grid", std::vector<int>{});
    c.threads = j.value("threads", 0);
    c.records_path = j.value("records_path", std::string());
    c.summary_path = j.value("summary_path", std::string());
    c.ks_threshold = j.value("ks_threshold", 0.08);
    c.corr_threshold = j.value("corr_threshold", 0.05);
    c.chi2_p_min = j.value("chi2_p_min", 0.01);
    c.mutual_ks_threshold = j.value("mutual_ks_threshold", 0.10);
    c.control_ks_threshold = j.value("control_ks_threshold", 0.06);
    c.tw_n_internal = j.value("tw_n_internal", 100000);
    c.tw_m_samples = j.value("tw_m_samples", 100000L);
    c.validate();
}

inline std::uint64_t config_hash(const ExperimentConfig& c) {
    const std::string s = nlohmann::json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Replica records

struct ReplicaRecord {
    long replica_index = 0;
    int n = 0;
    double b = 0.0;
    std::string tag;  // arm label (universality); empty elsewhere
    std::uint64_t seed = 0;
    double f = NAN;
    double fluct_stat = NAN;  // the suite's standardized statistic
    double xi1 = NAN;
    double xi2 = NAN;
    double gap = NAN;
    std::vector<int> counts;
    std::string method;
    nlohmann::json diagnostics;
    bool rejected = false;
    int resamples = 0;
    double wall_time = 0.0;  // seconds; excluded from replay comparisons
};

// fields that were never computed serialize as null, in memory and on disk
inline nlohmann::json num_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline void to_json(nlohmann::json& j, const ReplicaRecord& r) {
    j = nlohmann::json{{"replica_index", r.replica_index},
                       {"n", r.n},
                       {"b", r.b},
                       {"tag", r.tag},
                       {"seed", r.seed},
                       {"f", num_or_null(r.f)},
                       {"fluct_stat", num_or_null(r.fluct_stat)},
                       {"xi1", num_or_null(r.xi1)},
                       {"xi2", num_or_null(r.xi2)},
                       {"gap", num_or_null(r.gap)},
                       {"counts", r.counts},
                       {"method", r.method},
                       {"diagnostics",
                        r.diagnostics.is_null() ? nlohmann::json::object() : r.diagnostics},
                       {"rejected", r.rejected},
                       {"resamples", r.resamples},
                       {"wall_time", r.wall_time}};
}

inline double json_num(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    return v.is_null() ? NAN : v.get<double>();
}

inline void from_json(const nlohmann::json& j, ReplicaRecord& r) {
    r.replica_index = j.at("replica_index").get<long>();
    r.n = j.at("n").get<int>();
    r.b = j.at("b").get<double>();
    r.tag = j.value("tag", std::string());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.f = json_num(j, "f");
    r.fluct_stat = json_num(j, "fluct_stat");
    r.xi1 = json_num(j, "xi1");
    r.xi2 = json_num(j, "xi2");
    r.gap = json_num(j, "gap");
    r.counts = j.value("counts", std::vector<int>{});
    r.method = j.value("method", std::string());
    r.diagnostics = j.value("diagnostics", nlohmann::json::object());
    r.rejected = j.value("rejected", false);
    r.resamples = j.value("resamples", 0);
    r.wall_time = j.value("wall_time", 0.0);
}

// canonical ordering and identity for resume/replay
inline std::tuple<int, double, std::string, long> record_key(const ReplicaRecord& r) {
    return {r.n, r.b, r.tag, r.replica_index};
}

// ---------------------------------------------------------------------------
// Summaries

struct CellSummary {
    std::string suite;
    double b = 0.0;
    int n = 0;
    long m = 0;
    double ks = NAN;
    double ks_p = NAN;
    double mean = NAN;
    double var = NAN;
    bool pass = true;
    nlohmann::json detail;
};

struct SuiteSummary {
    std::string suite;
    std::string version = kVersion;
    std::uint64_t config_hash = 0;
    std::vector<CellSummary> cells;
    bool pass = true;
    nlohmann::json detail;
};

inline void to_json(nlohmann::json& j, const CellSummary& c) {
    j = nlohmann::json{{"suite", c.suite}, {"b", c.b},       {"n", c.n},
                       {"m", c.m},         {"ks", c.ks},     {"ks_p", c.ks_p},
                       {"mean", c.mean},   {"var", c.var},   {"pass", c.pass},
                       {"detail", c.detail}};
}

inline void to_json(nlohmann::json& j, const SuiteSummary& s) {
    j = nlohmann::json{{"suite", s.suite},
                       {"version", s.version},
                       {"config_hash", s.config_hash},
                       {"pass", s.pass},
                       {"cells", s.cells},
                       {"detail", s.detail}};
}

inline std::string summary_csv(const SuiteSummary& s) {
    std::ostringstream os;
    os << "suite,b,n,m,ks,ks_p,mean,var,pass\n";
    for (const auto& c : s.cells) {
        os << c.suite << "," << c.b << "," << c.n << "," << c.m << "," << c.ks << ","
           << c.ks_p << "," << c.mean << "," << c.var << "," << (c.pass ? 1 : 0) << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Record computation, one replica at a time

namespace detail {

// reserved stream for degenerate-gap resamples
inline SeedPlan resample_plan(std::uint64_t master, long replica, int attempt) {
    return SeedPlan{master, (1ULL << 40) + static_cast<std::uint64_t>(replica) * 128ULL +
                                static_cast<std::uint64_t>(attempt)};
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double secs() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

inline FeMethod pick_method(const std::string& override_method, double b) {
    if (override_method == "vertical") return FeMethod::vertical;
    if (override_method == "keyhole") return FeMethod::keyhole;
    if (override_method == "steepest") return FeMethod::steepest_descent;
    if (override_method != "auto") throw error("unknown method override: " + override_method);
    if (std::abs(b) <= 0.1) return FeMethod::steepest_descent;
    return b < 0.0 ? FeMethod::vertical : FeMethod::keyhole;
}

// Sample a spectrum for the configured ensemble at (n, seed). Gaussian
// ensembles go through the tridiagonal form (exact, with the corner spike
// equivalence); other laws need the dense matrix.
inline Spectrum sample_spectrum(const EnsembleSpec& base, int n, const SeedPlan& plan) {
    if (base.entry_law == EntryLaw::gaussian && base.diag_variance.empty()) {
        TridiagonalMatrix t = (base.spike_j > 0.0)
                                  ? sample_tridiag_spiked(base.alpha, n, base.spike_j, plan)
                                  : sample_tridiag(base.alpha, n, plan);
        return eig_full(t);
    }
    EnsembleSpec spec = base;
    spec.n = n;
    if (!spec.spike_vector.empty() &&
        spec.spike_vector.size() != static_cast<std::size_t>(n))
        throw error("sample_spectrum: spike_vector length does not match n");
    return eig_dense(sample_dense(spec, plan));
}

}  // namespace detail

// One transition replica: spectrum -> contour free energy -> statistic.
// Degenerate-gap rejections are resampled from the reserved stream.
inline ReplicaRecord transition_replica(const ExperimentConfig& cfg, int n, double b,
                                        long replica, const std::string& tag,
                                        const EnsembleSpec& arm_spec,
                                        std::uint64_t arm_seed) {
    detail::Timer timer;
    const ModelParams params = ModelParams::from_b(cfg.ensemble.alpha, n, b, arm_spec.spike_j);
    ReplicaRecord rec;
    rec.replica_index = replica;
    rec.n = n;
    rec.b = b;
    rec.tag = tag;

    int attempt = 0;
    for (;;) {
        const SeedPlan plan = (attempt == 0)
                                  ? SeedPlan{arm_seed, static_cast<std::uint64_t>(replica)}
                                  : detail::resample_plan(arm_seed, replica, attempt);
        rec.seed = plan.stream_seed();
        Spectrum spec = detail::sample_spectrum(arm_spec, n, plan);
        if (spec.gap() < 1e-13) {  // probability-zero event; resample
            if (++attempt > 100) throw error("transition_replica: persistent degenerate gap");
            continue;
        }
        const FeMethod method = detail::pick_method(cfg.method, b);
        FreeEnergyResult fe;
        switch (method) {
            case FeMethod::vertical: fe = f_vertical(spec, params); break;
            case FeMethod::keyhole: fe = f_keyhole(spec, params); break;
            case FeMethod::steepest_descent: fe = f_steepest(spec, params); break;
            default: throw error("transition_replica: bad method");
        }
        rec.resamples = attempt;
        rec.f = fe.f;
        rec.fluct_stat = fluctuation_stat(fe.f, params);
        rec.method = to_string(fe.method);
        rec.rejected = fe.rejected;
        const double n23 = std::pow(static_cast<double>(n), 2.0 / 3.0);
        rec.xi2 = n23 * (spec.values[0] - 2.0);
        rec.gap = n23 * spec.gap();
        const double logn = std::log(static_cast<double>(n));
        rec.xi1 = (0.5 * n - (params.alpha - 1) / 6.0 * logn - log_det_stat(spec, 2.0)) /
                  std::sqrt(params.alpha / 3.0 * logn);
        EdgeObservables eo = edge_observables(spec);
        rec.counts = eo.counts;
        rec.diagnostics["quad_error"] = fe.quad_error;
        rec.wall_time = timer.secs();
        return rec;
    }
}

// CLT1/CLT2 statistic straight from the tridiagonal pivots; which = 1 or 2.
inline ReplicaRecord clt_replica(const ExperimentConfig& cfg, int n, long replica, int which) {
    detail::Timer timer;
    const int alpha = cfg.ensemble.alpha;
    const double nn = static_cast<double>(n);
    const double logn = std::log(nn);
    const double n13 = std::cbrt(nn);
    const double c = cfg.clt_c;
    const double gamma = (which == 1) ? 2.0 + c * logn / (n13 * n13) : 2.0 + c / (n13 * n13);
    if (which == 1 && !(c > 0.0)) throw error("clt_replica: CLT1 needs C > 0");

    ReplicaRecord rec;
    rec.replica_index = replica;
    rec.n = n;
    rec.b = 0.0;
    int attempt = 0;
    for (;;) {
        const SeedPlan plan =
            (attempt == 0) ? SeedPlan{cfg.master_seed, static_cast<std::uint64_t>(replica)}
                           : detail::resample_plan(cfg.master_seed, replica, attempt);
        rec.seed = plan.stream_seed();
        double logdet = 0.0;
        double lam1 = NAN;
        bool above = false;
        if (cfg.ensemble.entry_law == EntryLaw::gaussian && cfg.ensemble.diag_variance.empty()) {
            TridiagonalMatrix t =
                (cfg.ensemble.spike_j > 0.0)
                    ? sample_tridiag_spiked(alpha, n, cfg.ensemble.spike_j, plan)
                    : sample_tridiag(alpha, n, plan);
            const LogDetPivots piv = log_det_pivots(t, gamma);
            logdet = piv.log_abs_det;
            above = piv.count_above > 0;
            const int l = choose_corner_size(n, cfg.corner_multiplier);
            lam1 = top_eigs_corner(t, l, 1).values[0];
        } else {
            EnsembleSpec spec = cfg.ensemble;
            spec.n = n;
            const Spectrum s = eig_dense(sample_dense(spec, plan));
            logdet = log_det_stat(s, gamma);
            above = s.values[0] >= gamma;
            lam1 = s.values[0];
        }
        if (which == 1 && above) {  // log(gamma - lambda_j) undefined; resample
            if (++attempt > 100) throw error("clt_replica: lambda_1 persistently above gamma");
            continue;
        }
        const double denom = std::sqrt(alpha / 3.0 * logn);
        double stat;
        if (which == 1) {
            stat = (logdet - 0.5 * nn - n13 * c * logn + 2.0 / 3.0 * std::pow(c * logn, 1.5) +
                    (alpha - 1) / 6.0 * logn) /
                   denom;
        } else {
            stat = (logdet - 0.5 * nn - n13 * c + (alpha - 1) / 6.0 * logn) / denom;
        }
        rec.resamples = attempt;
        rec.fluct_stat = stat;
        rec.xi2 = n13 * n13 * (lam1 - 2.0);
        rec.method = "pivot_logdet";
        rec.wall_time = timer.secs();
        return rec;
    }
}

// Independence replica: (xi1, xi2) via pivots at E = 2 and the corner minor.
inline ReplicaRecord independence_replica(const ExperimentConfig& cfg, int n, long replica) {
    detail::Timer timer;
    const int alpha = cfg.ensemble.alpha;
    const double nn = static_cast<double>(n);
    const double logn = std::log(nn);
    ReplicaRecord rec;
    rec.replica_index = replica;
    rec.n = n;
    rec.b = 0.0;
    const SeedPlan plan{cfg.master_seed, static_cast<std::uint64_t>(replica)};
    rec.seed = plan.stream_seed();
    TridiagonalMatrix t = (cfg.ensemble.spike_j > 0.0)
                              ? sample_tridiag_spiked(alpha, n, cfg.ensemble.spike_j, plan)
                              : sample_tridiag(alpha, n, plan);
    const LogDetPivots piv = log_det_pivots(t, 2.0);
    rec.xi1 = (0.5 * nn - (alpha - 1) / 6.0 * logn - piv.log_abs_det) /
              std::sqrt(alpha / 3.0 * logn);
    const int l = choose_corner_size(n, cfg.corner_multiplier);
    const Spectrum top2 = top_eigs_corner(t, l, 2);
    const double n23 = std::pow(nn, 2.0 / 3.0);
    rec.xi2 = n23 * (top2.values[0] - 2.0);
    rec.gap = n23 * (top2.values[0] - top2.values[1]);
    rec.method = "pivot_logdet+corner";
    rec.wall_time = timer.secs();
    return rec;
}

// Edge replica: scaled edge observables from the corner minor's spectrum.
inline ReplicaRecord edge_replica(const ExperimentConfig& cfg, int n, long replica) {
    detail::Timer timer;
    ReplicaRecord rec;
    rec.replica_index = replica;
    rec.n = n;
    rec.b = 0.0;
    const SeedPlan plan{cfg.master_seed, static_cast<std::uint64_t>(replica)};
    rec.seed = plan.stream_seed();
    TridiagonalMatrix t = sample_tridiag(cfg.ensemble.alpha, n, plan);
    const int l = choose_corner_size(n, cfg.corner_multiplier);
    Spectrum corner = eig_full(corner_minor(t, l));
    corner.n = n;  // edge scalings refer to the full dimension
    corner.source = SpectrumSource::corner_minor;
    corner.corner_l = l;
    EdgeObservables eo = edge_observables(corner);
    rec.xi2 = eo.xi2;
    rec.gap = eo.gap;
    rec.counts = eo.counts;
    const double n23 = std::pow(static_cast<double>(n), 2.0 / 3.0);
    for (double bn : {3.0, 5.0, 8.0})
        rec.diagnostics["count_bn_" + std::to_string(static_cast<int>(bn))] =
            counting(corner, 2.0 - bn / n23);
    rec.method = "corner_minor";
    rec.wall_time = timer.secs();
    return rec;
}

// Corner-accuracy replica: full-matrix top eigenvalue against the minors.
inline ReplicaRecord corner_accuracy_replica(const ExperimentConfig& cfg, int n, long replica) {
    detail::Timer timer;
    ReplicaRecord rec;
    rec.replica_index = replica;
    rec.n = n;
    rec.b = 0.0;
    const SeedPlan plan{cfg.master_seed, static_cast<std::uint64_t>(replica)};
    rec.seed = plan.stream_seed();
    TridiagonalMatrix t = sample_tridiag(cfg.ensemble.alpha, n, plan);
    const double full = top_eigs_corner(t, n, 1).values[0];
    const double n23 = std::pow(static_cast<double>(n), 2.0 / 3.0);
    rec.xi2 = n23 * (full - 2.0);
    double prev_err = INFINITY;
    bool monotone = true;
    for (double mult : {5.0, 10.0, 20.0}) {
        const int l = choose_corner_size(n, mult);
        const double approx = top_eigs_corner(t, l, 1).values[0];
        const double err = full - approx;  // >= 0 by interlacing
        rec.diagnostics["err_mult_" + std::to_string(static_cast<int>(mult))] = err;
        if (err > prev_err + 1e-15) monotone = false;
        prev_err = err;
    }
    rec.diagnostics["monotone"] = monotone;
    rec.method = "sturm_bisect";
    rec.wall_time = timer.secs();
    return rec;
}

// Log-determinant recursion replica: one O(N) pass against the eigenvalue
// route at the shifted edge point.
inline ReplicaRecord recursion_replica(const ExperimentConfig& cfg, int n, long replica) {
    detail::Timer timer;
    ReplicaRecord rec;
    rec.replica_index = replica;
    rec.n = n;
    rec.b = 0.0;
    const SeedPlan plan{cfg.master_seed, static_cast<std::uint64_t>(replica)};
    rec.seed = plan.stream_seed();
    TridiagonalMatrix t = sample_tridiag(cfg.ensemble.alpha, n, plan);
    const LogDetRecursionResult r = log_det_recursion(t);
    const Spectrum s = eig_full(t);
    const double eig_route = log_det_stat(s, r.shifted_point);
    const double eig_route_two = log_det_stat(s, 2.0);
    rec.fluct_stat = r.shifted - eig_route;  // the paired difference
    rec.diagnostics["recursion_shifted"] = r.shifted;
    rec.diagnostics["eig_shifted"] = eig_route;
    rec.diagnostics["recursion_at_two"] = r.at_two;
    rec.diagnostics["eig_at_two"] = eig_route_two;
    rec.diagnostics["sigma_bar"] = r.sigma_bar;
    rec.method = "recursion_vs_eig";
    rec.wall_time = timer.secs();
    return rec;
}

// Stickiness replica: spiked and unspiked dense matrices from the same noise.
inline ReplicaRecord stickiness_replica(const ExperimentConfig& cfg, int n, double j_spike,
                                        long replica) {
    detail::Timer timer;
    ReplicaRecord rec;
    rec.replica_index = replica;
    rec.n = n;
    rec.b = j_spike;  // reuse the b column for the spike in this suite
    const SeedPlan plan{cfg.master_seed, static_cast<std::uint64_t>(replica)};
    rec.seed = plan.stream_seed();
    EnsembleSpec spec = cfg.ensemble;
    spec.n = n;
    spec.spike_j = 0.0;
    // same noise, spike added afterwards
    const bool random_spike = !cfg.ensemble.spike_vector.empty();
    std::vector<double> v = random_spike ? random_unit_vector(n, plan)
                                         : std::vector<double>{};
    auto spike_at = [&](int i) {
        return v.empty() ? 1.0 / std::sqrt(static_cast<double>(n)) : v[i];
    };
    Spectrum unspiked, spiked;
    if (spec.alpha == 2) {
        DenseSym w = sample_dense_sym(spec, plan);
        unspiked = eig_dense(w);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) w.at(i, j) += j_spike * spike_at(i) * spike_at(j);
        spiked = eig_dense(w);
    } else {
        DenseHerm w = sample_dense_herm(spec, plan);
        unspiked = eig_dense(w);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                w.at(i, j) += std::complex<double>(j_spike * spike_at(i) * spike_at(j), 0.0);
        spiked = eig_dense(w);
    }
    double max_diff = 0.0;
    bool interlaced = true;
    for (int j = 0; j < std::min(5, n); ++j) {
        max_diff = std::max(max_diff, std::abs(spiked.values[j] - unspiked.values[j]));
        if (spiked.values[j] < unspiked.values[j] - 1e-12) interlaced = false;
    }
    rec.fluct_stat = max_diff;
    rec.diagnostics["interlaced"] = interlaced;
    rec.diagnostics["spike_vector"] = random_spike ? "random" : "uniform";
    rec.method = "dense_paired";
    rec.wall_time = timer.secs();
    return rec;
}

// Eigenvector-decay replica.
inline ReplicaRecord eigvec_replica(const ExperimentConfig& cfg, int n, long replica) {
    detail::Timer timer;
    ReplicaRecord rec;
    rec.replica_index = replica;
    rec.n = n;
    rec.b = 0.0;
    const SeedPlan plan{cfg.master_seed, static_cast<std::uint64_t>(replica)};
    rec.seed = plan.stream_seed();
    TridiagonalMatrix t = sample_tridiag(cfg.ensemble.alpha, n, plan);
    const PrincipalEigenvector pe = principal_eigenvector(t);
    rec.fluct_stat = pe.early_max;
    rec.xi2 = std::pow(static_cast<double>(n), 2.0 / 3.0) * (pe.lambda1 - 2.0);
    rec.diagnostics["iterations"] = pe.iterations;
    rec.method = "inverse_iteration";
    rec.wall_time = timer.secs();
    return rec;
}

// G-derivative replica: derivative values at gamma_hat and the
// lambda_1-centered inverse moments.
inline ReplicaRecord g_derivative_replica(const ExperimentConfig& cfg, int n, double b,
                                          long replica) {
    detail::Timer timer;
    ReplicaRecord rec;
    rec.replica_index = replica;
    rec.n = n;
    rec.b = b;
    const SeedPlan plan{cfg.master_seed, static_cast<std::uint64_t>(replica)};
    rec.seed = plan.stream_seed();
    const ModelParams params = ModelParams::from_b(cfg.ensemble.alpha, n, b);
    TridiagonalMatrix t = sample_tridiag(cfg.ensemble.alpha, n, plan);
    const Spectrum s = eig_full(t);
    const double z = std::max(params.gamma_hat_, s.values[0] + 1e-10);
    for (int l = 1; l <= 3; ++l)
        rec.diagnostics["g" + std::to_string(l)] = g_derivative(s, params.beta, z, l);
    rec.diagnostics["inv1"] = inverse_moment_top(s, 1);
    rec.diagnostics["inv2"] = inverse_moment_top(s, 2);
    rec.fluct_stat = rec.diagnostics["g2"].get<double>();
    rec.method = "eig_full";
    rec.wall_time = timer.secs();
    return rec;
}

// ---------------------------------------------------------------------------
// Suite drivers: compute missing records, then summarize (summaries are pure
// functions of the record set).

using RecordSet = std::vector<ReplicaRecord>;

inline void sort_records(RecordSet& records) {
    std::sort(records.begin(), records.end(),
              [](const ReplicaRecord& a, const ReplicaRecord& b) {
                  return record_key(a) < record_key(b);
              });
}

inline RecordSet load_records(const std::string& path) {
    RecordSet out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(nlohmann::json::parse(line).get<ReplicaRecord>());
    }
    return out;
}

inline void write_records(const std::string& path, const RecordSet& records) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw error("cannot open records file: " + path);
    for (const auto& r : records) out << nlohmann::json(r).dump() << "\n";
}

// Fills in any record not already present (resume semantics): each record is
// a pure function of (config, n, b, tag, replica_index), so an interrupted
// run and a fresh run produce identical record sets.
template <class Fn>
RecordSet ensure_records(const ExperimentConfig& cfg,
                         const std::vector<std::tuple<int, double, std::string>>& cells,
                         const Fn& compute, RecordSet existing) {
    std::map<std::tuple<int, double, std::string, long>, ReplicaRecord> have;
    for (auto& r : existing) have.emplace(record_key(r), std::move(r));
    struct Task {
        int n;
        double b;
        std::string tag;
        long replica;
    };
    std::vector<Task> tasks;
    for (const auto& [n, b, tag] : cells)
        for (long k = 0; k < cfg.m_replicas; ++k)
            if (!have.count({n, b, tag, k})) tasks.push_back({n, b, tag, k});
    std::vector<ReplicaRecord> fresh(tasks.size());
    parallel_for(
        static_cast<long>(tasks.size()),
        [&](long i) {
            const Task& t = tasks[static_cast<std::size_t>(i)];
            fresh[static_cast<std::size_t>(i)] = compute(t.n, t.b, t.tag, t.replica);
        },
        cfg.threads);
    RecordSet all;
    all.reserve(have.size() + fresh.size());
    for (auto& [k, r] : have) all.push_back(std::move(r));
    for (auto& r : fresh) all.push_back(std::move(r));
    sort_records(all);
    return all;
}

inline std::vector<double> collect(const RecordSet& rs, int n, double b,
                                   const std::string& tag, double ReplicaRecord::*field) {
    std::vector<double> out;
    for (const auto& r : rs)
        if (r.n == n && r.b == b && r.tag == tag && !r.rejected) out.push_back(r.*field);
    return out;
}

inline long count_cell(const RecordSet& rs, int n, double b, const std::string& tag) {
    long m = 0;
    for (const auto& r : rs)
        if (r.n == n && r.b == b && r.tag == tag) ++m;
    return m;
}

inline long total_resamples(const RecordSet& rs, int n, double b, const std::string& tag) {
    long m = 0;
    for (const auto& r : rs)
        if (r.n == n && r.b == b && r.tag == tag) m += r.resamples;
    return m;
}

// Shared TW reference for a summary run; a pure function of the config.
inline ReferenceDistribution tw_for(const ExperimentConfig& cfg) {
    return tw_table(cfg.ensemble.alpha, cfg.tw_n_internal, cfg.tw_m_samples,
                    cfg.master_seed ^ 0x715a6ee1ULL, cfg.threads);
}

// ---------------------------------------------------------------------------
// Per-suite summaries (pure functions of config + records)

inline SuiteSummary summarize_transition(const ExperimentConfig& cfg, const RecordSet& rs,
                                         const ReferenceDistribution* tw) {
    SuiteSummary sum;
    sum.suite = cfg.suite;
    sum.config_hash = config_hash(cfg);
    const ReferenceDistribution gauss = gaussian_reference();
    std::map<double, std::vector<std::pair<int, double>>> trend;  // b -> (n, ks)
    for (int n : cfg.sizes()) {
        for (double b : cfg.b_grid) {
            CellSummary cell;
            cell.suite = cfg.suite;
            cell.b = b;
            cell.n = n;
            auto stats = collect(rs, n, b, "", &ReplicaRecord::fluct_stat);
            cell.m = count_cell(rs, n, b, "");
            if (stats.empty()) continue;
            const MeanVar mv = mean_var(stats);
            cell.mean = mv.mean;
            cell.var = mv.var;
            const long resamples = total_resamples(rs, n, b, "");
            const bool rejection_ok = resamples <= cell.m / 100;
            cell.detail["resamples"] = resamples;
            if (b > 0.0) {
                if (!tw) throw error("summarize_transition: tw table required for b > 0");
                const double c = std::sqrt(3.0 / cfg.ensemble.alpha) * b;
                const ReferenceDistribution conv = convolution_cdf(c, *tw);
                const KsReport kc = ks_distance(stats, conv);
                const KsReport kg = ks_distance(stats, gauss);
                cell.ks = kc.statistic;
                cell.ks_p = kc.p_value;
                const double var_target = 1.0 + 3.0 / cfg.ensemble.alpha * b * b * tw->variance();
                const bool var_ok = std::abs(mv.var - var_target) <= 0.30 * var_target;
                cell.detail["ks_vs_gaussian"] = kg.statistic;
                cell.detail["mixture_closer"] = kc.statistic < kg.statistic;
                cell.detail["var_target"] = var_target;
                cell.detail["var_ok"] = var_ok;
                cell.pass = (kc.statistic < kg.statistic) && var_ok && rejection_ok;
                trend[b].emplace_back(n, kc.statistic);
            } else {
                const KsReport kg = ks_distance(stats, gauss, cfg.ks_threshold);
                cell.ks = kg.statistic;
                cell.ks_p = kg.p_value;
                cell.pass = kg.pass && rejection_ok;
                trend[b].emplace_back(n, kg.statistic);
            }
            sum.pass = sum.pass && cell.pass;
            sum.cells.push_back(std::move(cell));
        }
    }
    // trend check: KS non-increasing in N per b (the falsifiable signature
    // of convergence, independent of any calibrated constant)
    nlohmann::json trends = nlohmann::json::object();
    for (auto& [b, seq] : trend) {
        if (seq.size() < 2) continue;
        std::sort(seq.begin(), seq.end());
        bool ok = true;
        for (std::size_t i = 1; i < seq.size(); ++i)
            if (seq[i].second > seq[i - 1].second) ok = false;
        trends[std::to_string(b)] = ok;
        sum.pass = sum.pass && ok;
    }
    sum.detail["trend_nonincreasing"] = trends;
    return sum;
}

inline SuiteSummary summarize_clt(const ExperimentConfig& cfg, const RecordSet& rs) {
    SuiteSummary sum;
    sum.suite = cfg.suite;
    sum.config_hash = config_hash(cfg);
    const ReferenceDistribution gauss = gaussian_reference();
    for (int n : cfg.sizes()) {
        CellSummary cell;
        cell.suite = cfg.suite;
        cell.b = 0.0;
        cell.n = n;
        auto stats = collect(rs, n, 0.0, "", &ReplicaRecord::fluct_stat);
        cell.m = count_cell(rs, n, 0.0, "");
        if (stats.empty()) continue;
        const MeanVar mv = mean_var(stats);
        cell.mean = mv.mean;
        cell.var = mv.var;
        const KsReport kg = ks_distance(stats, gauss, cfg.ks_threshold);
        cell.ks = kg.statistic;
        cell.ks_p = kg.p_value;
        cell.pass = kg.pass;
        sum.pass = sum.pass && cell.pass;
        sum.cells.push_back(std::move(cell));
    }
    return sum;
}

inline SuiteSummary summarize_independence(const ExperimentConfig& cfg, const RecordSet& rs,
                                           const ReferenceDistribution& tw) {
    SuiteSummary sum;
    sum.suite = cfg.suite;
    sum.config_hash = config_hash(cfg);
    const ReferenceDistribution gauss = gaussian_reference();
    for (int n : cfg.sizes()) {
        CellSummary cell;
        cell.suite = cfg.suite;
        cell.b = 0.0;
        cell.n = n;
        std::vector<std::pair<double, double>> pairs;
        std::vector<double> xi1s, xi2s;
        for (const auto& r : rs)
            if (r.n == n && !r.rejected) {
                pairs.emplace_back(r.xi1, r.xi2);
                xi1s.push_back(r.xi1);
                xi2s.push_back(r.xi2);
            }
        cell.m = static_cast<long>(pairs.size());
        if (pairs.empty()) continue;
        const IndependenceReport rep = joint_independence_report(pairs);
        const KsReport k1 = ks_distance(xi1s, gauss, cfg.ks_threshold);
        const KsReport k2 = ks_distance(xi2s, tw, cfg.ks_threshold);
        cell.mean = rep.corr;
        cell.var = rep.chi2;
        cell.ks = std::max(k1.statistic, k2.statistic);
        cell.ks_p = std::min(k1.p_value, k2.p_value);
        cell.detail["corr"] = rep.corr;
        cell.detail["chi2"] = rep.chi2;
        cell.detail["chi2_p"] = rep.chi2_p;
        cell.detail["ks_xi1_gaussian"] = k1.statistic;
        cell.detail["ks_xi2_tw"] = k2.statistic;
        cell.pass = std::abs(rep.corr) < cfg.corr_threshold && rep.chi2_p > cfg.chi2_p_min &&
                    k1.pass && k2.pass;
        sum.pass = sum.pass && cell.pass;
        sum.cells.push_back(std::move(cell));
    }
    return sum;
}

inline SuiteSummary summarize_edge(const ExperimentConfig& cfg, const RecordSet& rs) {
    SuiteSummary sum;
    sum.suite = cfg.suite;
    sum.config_hash = config_hash(cfg);
    std::map<int, double> mean_count_x5;
    for (int n : cfg.sizes()) {
        CellSummary cell;
        cell.suite = cfg.suite;
        cell.b = 0.0;
        cell.n = n;
        std::vector<double> xi2s = collect(rs, n, 0.0, "", &ReplicaRecord::xi2);
        std::vector<double> gaps = collect(rs, n, 0.0, "", &ReplicaRecord::gap);
        cell.m = count_cell(rs, n, 0.0, "");
        if (xi2s.empty()) continue;
        std::sort(xi2s.begin(), xi2s.end());
        std::sort(gaps.begin(), gaps.end());
        cell.mean = mean_var(xi2s).mean;
        cell.var = mean_var(xi2s).var;
        cell.detail["xi2_quantiles"] = {xi2s.front(), median_of_sorted(xi2s), xi2s.back()};
        cell.detail["gap_quantiles"] = {gaps.front(), median_of_sorted(gaps), gaps.back()};
        const bool gap_positive = gaps.front() > 0.0;
        // mean counts at the configured thresholds x = 1, 2, 5, 10
        std::vector<double> mean_counts(4, 0.0);
        long m = 0;
        long bn8_hits = 0;
        for (const auto& r : rs) {
            if (r.n != n) continue;
            for (std::size_t i = 0; i < r.counts.size() && i < 4; ++i)
                mean_counts[i] += r.counts[i];
            if (r.diagnostics.contains("count_bn_8") &&
                r.diagnostics["count_bn_8"].get<double>() >= 0.1 * std::pow(8.0, 1.5))
                ++bn8_hits;
            ++m;
        }
        for (auto& c : mean_counts) c /= static_cast<double>(m);
        cell.detail["mean_counts"] = mean_counts;
        mean_count_x5[n] = mean_counts[2];
        const double bn8_frac = static_cast<double>(bn8_hits) / static_cast<double>(m);
        cell.detail["count_bn8_frac"] = bn8_frac;
        cell.pass = gap_positive && bn8_frac >= 0.95;
        sum.pass = sum.pass && cell.pass;
        sum.cells.push_back(std::move(cell));
    }
    // stability of the x = 5 mean count across sizes (within 15%)
    if (mean_count_x5.size() >= 2) {
        bool stable = true;
        double prev = -1.0;
        for (auto& [n, c] : mean_count_x5) {
            if (prev >= 0.0 && std::abs(c - prev) > 0.15 * std::max(prev, c)) stable = false;
            prev = c;
        }
        sum.detail["count_x5_stable"] = stable;
        sum.pass = sum.pass && stable;
    }
    return sum;
}

inline SuiteSummary summarize_corner_accuracy(const ExperimentConfig& cfg, const RecordSet& rs) {
    SuiteSummary sum;
    sum.suite = cfg.suite;
    sum.config_hash = config_hash(cfg);
    for (int n : cfg.sizes()) {
        CellSummary cell;
        cell.suite = cfg.suite;
        cell.b = 0.0;
        cell.n = n;
        std::vector<double> err10;
        long monotone = 0, m = 0;
        nlohmann::json per_mult = nlohmann::json::object();
        for (const char* key : {"err_mult_5", "err_mult_10", "err_mult_20"}) {
            std::vector<double> errs;
            for (const auto& r : rs)
                if (r.n == n && r.diagnostics.contains(key))
                    errs.push_back(r.diagnostics[key].get<double>());
            if (errs.empty()) continue;
            std::sort(errs.begin(), errs.end());
            nlohmann::json stats = {
                {"median", median_of_sorted(errs)},
                {"p99", errs[static_cast<std::size_t>(0.99 * (errs.size() - 1))]},
                {"max", errs.back()}};
            per_mult[key] = stats;
            if (std::string(key) == "err_mult_10") err10 = errs;
        }
        for (const auto& r : rs)
            if (r.n == n) {
                ++m;
                if (r.diagnostics.value("monotone", false)) ++monotone;
            }
        cell.m = m;
        if (err10.empty()) continue;
        const double med = median_of_sorted(err10);
        const double p99 = err10[static_cast<std::size_t>(0.99 * (err10.size() - 1))];
        const double mono_frac = static_cast<double>(monotone) / static_cast<double>(m);
        cell.mean = med;
        cell.var = p99;
        cell.detail = per_mult;
        cell.detail["monotone_frac"] = mono_frac;
        cell.pass = med < 1e-10 && p99 < 1e-8 && mono_frac >= 0.95;
        sum.pass = sum.pass && cell.pass;
        sum.cells.push_back(std::move(cell));
    }
    return sum;
}

inline SuiteSummary summarize_recursion(const ExperimentConfig& cfg, const RecordSet& rs) {
    SuiteSummary sum;
    sum.suite = cfg.suite;
    sum.config_hash = config_hash(cfg);
    for (int n : cfg.sizes()) {
        CellSummary cell;
        cell.suite = cfg.suite;
        cell.b = 0.0;
        cell.n = n;
        auto diffs = collect(rs, n, 0.0, "", &ReplicaRecord::fluct_stat);
        cell.m = count_cell(rs, n, 0.0, "");
        if (diffs.empty()) continue;
        const MeanVar mv = mean_var(diffs);
        cell.mean = mv.mean;
        cell.var = mv.var;
        double sigma_bar = 0.0;
        for (const auto& r : rs)
            if (r.n == n && r.diagnostics.contains("sigma_bar")) {
                sigma_bar = r.diagnostics["sigma_bar"].get<double>();
                break;
            }
        const double sd = std::sqrt(mv.var);
        const double bound = 3.0 * sigma_bar * sigma_bar;
        cell.detail["sd"] = sd;
        cell.detail["bound_3_sigma_bar_sq"] = bound;
        cell.pass = sd <= bound;
        sum.pass = sum.pass && cell.pass;
        sum.cells.push_back(std::move(cell));
    }
    return sum;
}

inline SuiteSummary summarize_stickiness(const ExperimentConfig& cfg, const RecordSet& rs) {
    SuiteSummary sum;
    sum.suite = cfg.suite;
    sum.config_hash = config_hash(cfg);
    const std::vector<double> spikes = cfg.b_grid.empty() ? std::vector<double>{0.5} : cfg.b_grid;
    for (int n : cfg.sizes()) {
        for (double j : spikes) {
            CellSummary cell;
            cell.suite = cfg.suite;
            cell.b = j;
            cell.n = n;
            auto diffs = collect(rs, n, j, "", &ReplicaRecord::fluct_stat);
            cell.m = count_cell(rs, n, j, "");
            if (diffs.empty()) continue;
            const double bound = 10.0 * std::pow(static_cast<double>(n), -0.9);
            long hits = 0, interlaced = 0;
            for (const auto& r : rs)
                if (r.n == n && r.b == j) {
                    if (r.fluct_stat < bound) ++hits;
                    if (r.diagnostics.value("interlaced", false)) ++interlaced;
                }
            const MeanVar mv = mean_var(diffs);
            cell.mean = mv.mean;
            cell.var = mv.var;
            const double frac = static_cast<double>(hits) / static_cast<double>(cell.m);
            cell.detail["bound"] = bound;
            cell.detail["frac_within_bound"] = frac;
            cell.detail["interlaced_all"] = interlaced == cell.m;
            cell.pass = (j == 0.0) ? (mv.mean == 0.0)
                                   : (frac >= 0.95 && interlaced == cell.m);
            sum.pass = sum.pass && cell.pass;
            sum.cells.push_back(std::move(cell));
        }
    }
    return sum;
}

inline SuiteSummary summarize_eigvec(const ExperimentConfig& cfg, const RecordSet& rs) {
    SuiteSummary sum;
    sum.suite = cfg.suite;
    sum.config_hash = config_hash(cfg);
    for (int n : cfg.sizes()) {
        CellSummary cell;
        cell.suite = cfg.suite;
        cell.b = 0.0;
        cell.n = n;
        auto vals = collect(rs, n, 0.0, "", &ReplicaRecord::fluct_stat);
        cell.m = count_cell(rs, n, 0.0, "");
        if (vals.empty()) continue;
        long hits = 0;
        for (double v : vals)
            if (v < 1e-8) ++hits;
        const double frac = static_cast<double>(hits) / static_cast<double>(vals.size());
        std::sort(vals.begin(), vals.end());
        cell.mean = median_of_sorted(vals);
        cell.var = vals.back();
        cell.detail["frac_below_1e8"] = frac;
        cell.pass = frac >= 0.95;
        sum.pass = sum.pass && cell.pass;
        sum.cells.push_back(std::move(cell));
    }
    return sum;
}

inline SuiteSummary summarize_g_derivatives(const ExperimentConfig& cfg, const RecordSet& rs) {
    SuiteSummary sum;
    sum.suite = cfg.suite;
    sum.config_hash = config_hash(cfg);
    for (int n : cfg.sizes()) {
        for (double b : cfg.b_grid) {
            CellSummary cell;
            cell.suite = cfg.suite;
            cell.b = b;
            cell.n = n;
            std::vector<double> g2s, inv1s;
            for (const auto& r : rs)
                if (r.n == n && r.b == b) {
                    g2s.push_back(r.diagnostics["g2"].get<double>());
                    inv1s.push_back(r.diagnostics["inv1"].get<double>());
                }
            cell.m = static_cast<long>(g2s.size());
            if (g2s.empty()) continue;
            std::sort(g2s.begin(), g2s.end());
            const double med = median_of_sorted(g2s);
            // paper scale for G''(gamma_hat): N^{1/3} / (2|b| sqrt(log N))
            const double nn = static_cast<double>(n);
            const double target =
                std::cbrt(nn) / (2.0 * std::abs(b) * std::sqrt(std::log(nn)));
            const MeanVar mv_inv = mean_var(inv1s);
            cell.mean = med;
            cell.var = mv_inv.mean;
            cell.detail["g2_median"] = med;
            cell.detail["g2_target"] = target;
            cell.detail["inv1_mean"] = mv_inv.mean;
            const bool g2_ok = med > 0.5 * target && med < 2.0 * target;
            const bool inv1_ok = mv_inv.mean > 0.85 && mv_inv.mean < 1.15;
            cell.pass = g2_ok && inv1_ok;
            sum.pass = sum.pass && cell.pass;
            sum.cells.push_back(std::move(cell));
        }
    }
    return sum;
}

inline SuiteSummary summarize_universality(const ExperimentConfig& cfg, const RecordSet& rs) {
    SuiteSummary sum;
    sum.suite = cfg.suite;
    sum.config_hash = config_hash(cfg);
    for (int n : cfg.sizes()) {
        for (double b : cfg.b_grid) {
            CellSummary cell;
            cell.suite = cfg.suite;
            cell.b = b;
            cell.n = n;
            auto ga = collect(rs, n, b, "gaussian_a", &ReplicaRecord::fluct_stat);
            auto gb = collect(rs, n, b, "gaussian_b", &ReplicaRecord::fluct_stat);
            auto alt = collect(rs, n, b, "alt_law", &ReplicaRecord::fluct_stat);
            cell.m = static_cast<long>(ga.size() + gb.size() + alt.size());
            if (ga.empty() || gb.empty() || alt.empty()) continue;
            const KsReport mutual = ks_two_sample(ga, alt, cfg.mutual_ks_threshold);
            const KsReport control = ks_two_sample(ga, gb, cfg.control_ks_threshold);
            cell.ks = mutual.statistic;
            cell.ks_p = mutual.p_value;
            cell.mean = mean_var(alt).mean;
            cell.var = mean_var(alt).var;
            cell.detail["mutual_ks"] = mutual.statistic;
            cell.detail["control_ks"] = control.statistic;
            cell.pass = mutual.pass && control.pass;
            sum.pass = sum.pass && cell.pass;
            sum.cells.push_back(std::move(cell));
        }
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Drivers

inline RecordSet compute_suite_records(const ExperimentConfig& cfg, RecordSet existing) {
    using Cell = std::tuple<int, double, std::string>;
    std::vector<Cell> cells;
    const std::vector<int> sizes = cfg.sizes();
    if (cfg.suite == "transition") {
        for (int n : sizes)
            for (double b : cfg.b_grid) cells.emplace_back(n, b, "");
        return ensure_records(
            cfg, cells,
            [&](int n, double b, const std::string& tag, long k) {
                return transition_replica(cfg, n, b, k, tag, cfg.ensemble, cfg.master_seed);
            },
            std::move(existing));
    }
    if (cfg.suite == "clt1" || cfg.suite == "clt2") {
        const int which = (cfg.suite == "clt1") ? 1 : 2;
        for (int n : sizes) cells.emplace_back(n, 0.0, "");
        return ensure_records(
            cfg, cells,
            [&](int n, double, const std::string&, long k) { return clt_replica(cfg, n, k, which); },
            std::move(existing));
    }
    if (cfg.suite == "independence") {
        for (int n : sizes) cells.emplace_back(n, 0.0, "");
        return ensure_records(
            cfg, cells,
            [&](int n, double, const std::string&, long k) {
                return independence_replica(cfg, n, k);
            },
            std::move(existing));
    }
    if (cfg.suite == "edge") {
        for (int n : sizes) cells.emplace_back(n, 0.0, "");
        return ensure_records(
            cfg, cells,
            [&](int n, double, const std::string&, long k) { return edge_replica(cfg, n, k); },
            std::move(existing));
    }
    if (cfg.suite == "corner_accuracy") {
        for (int n : sizes) cells.emplace_back(n, 0.0, "");
        return ensure_records(
            cfg, cells,
            [&](int n, double, const std::string&, long k) {
                return corner_accuracy_replica(cfg, n, k);
            },
            std::move(existing));
    }
    if (cfg.suite == "recursion") {
        for (int n : sizes) cells.emplace_back(n, 0.0, "");
        return ensure_records(
            cfg, cells,
            [&](int n, double, const std::string&, long k) { return recursion_replica(cfg, n, k); },
            std::move(existing));
    }
    if (cfg.suite == "stickiness") {
        const std::vector<double> spikes =
            cfg.b_grid.empty() ? std::vector<double>{0.5} : cfg.b_grid;
        for (int n : sizes)
            for (double j : spikes) cells.emplace_back(n, j, "");
        return ensure_records(
            cfg, cells,
            [&](int n, double j, const std::string&, long k) {
                return stickiness_replica(cfg, n, j, k);
            },
            std::move(existing));
    }
    if (cfg.suite == "eigvec_decay") {
        for (int n : sizes) cells.emplace_back(n, 0.0, "");
        return ensure_records(
            cfg, cells,
            [&](int n, double, const std::string&, long k) { return eigvec_replica(cfg, n, k); },
            std::move(existing));
    }
    if (cfg.suite == "g_derivatives") {
        for (int n : sizes)
            for (double b : cfg.b_grid) cells.emplace_back(n, b, "");
        return ensure_records(
            cfg, cells,
            [&](int n, double b, const std::string&, long k) {
                return g_derivative_replica(cfg, n, b, k);
            },
            std::move(existing));
    }
    if (cfg.suite == "universality") {
        for (int n : sizes)
            for (double b : cfg.b_grid)
                for (const char* tag : {"gaussian_a", "gaussian_b", "alt_law"})
                    cells.emplace_back(n, b, tag);
        return ensure_records(
            cfg, cells,
            [&](int n, double b, const std::string& tag, long k) {
                EnsembleSpec arm = cfg.ensemble;
                std::uint64_t seed = cfg.master_seed;
                if (tag == "gaussian_a" || tag == "gaussian_b") {
                    arm.entry_law = EntryLaw::gaussian;
                    arm.diag_variance.clear();
                    if (tag == "gaussian_b") seed = cfg.master_seed ^ 0x9e3779b97f4a7c15ULL;
                }
                return transition_replica(cfg, n, b, k, tag, arm, seed);
            },
            std::move(existing));
    }
    throw error("unknown suite: " + cfg.suite);
}

inline SuiteSummary summarize_suite(const ExperimentConfig& cfg, const RecordSet& records) {
    if (cfg.suite == "transition") {
        bool needs_tw = false;
        for (double b : cfg.b_grid) needs_tw = needs_tw || b > 0.0;
        if (needs_tw) {
            const ReferenceDistribution tw = tw_for(cfg);
            return summarize_transition(cfg, records, &tw);
        }
        return summarize_transition(cfg, records, nullptr);
    }
    if (cfg.suite == "clt1" || cfg.suite == "clt2") return summarize_clt(cfg, records);
    if (cfg.suite == "independence") return summarize_independence(cfg, records, tw_for(cfg));
    if (cfg.suite == "edge") return summarize_edge(cfg, records);
    if (cfg.suite == "corner_accuracy") return summarize_corner_accuracy(cfg, records);
    if (cfg.suite == "recursion") return summarize_recursion(cfg, records);
    if (cfg.suite == "stickiness") return summarize_stickiness(cfg, records);
    if (cfg.suite == "eigvec_decay") return summarize_eigvec(cfg, records);
    if (cfg.suite == "g_derivatives") return summarize_g_derivatives(cfg, records);
    if (cfg.suite == "universality") return summarize_universality(cfg, records);
    throw error("unknown suite: " + cfg.suite);
}

// Run (or resume) a suite: compute missing records, persist them along with a
// config sidecar, summarize, persist the summary as CSV plus JSON detail.
inline SuiteSummary run_suite(const ExperimentConfig& cfg) {
    cfg.validate();
    RecordSet existing =
        cfg.records_path.empty() ? RecordSet{} : load_records(cfg.records_path);
    RecordSet records = compute_suite_records(cfg, std::move(existing));
    if (!cfg.records_path.empty()) {
        write_records(cfg.records_path, records);
        std::ofstream side(cfg.records_path + ".config.json");
        side << nlohmann::json(cfg).dump(2) << "\n";
    }
    SuiteSummary sum = summarize_suite(cfg, records);
    if (!cfg.summary_path.empty()) {
        std::ofstream csv(cfg.summary_path);
        csv << summary_csv(sum);
        std::ofstream js(cfg.summary_path + ".json");
        js << nlohmann::json(sum).dump(2) << "\n";
    }
    return sum;
}

}  // namespace ssk
