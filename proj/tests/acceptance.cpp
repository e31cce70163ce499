// Acceptance suite: one pass/fail line per criterion, each at its pinned
// parameters and tolerances. Exit code 0 when all pass, 2 otherwise.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "ssk/ensembles.hpp"
#include "ssk/experiments.hpp"
#include "ssk/free_energy.hpp"
#include "ssk/limit_laws.hpp"
#include "ssk/spectral.hpp"
#include "ssk/verify.hpp"

using namespace ssk;

namespace {

struct Criterion {
    int id;
    bool pass;
    double seconds;
    double budget_seconds;
    std::string detail;
};

std::vector<Criterion> g_results;

template <class Fn>
void run_criterion(int id, double budget_seconds, const Fn& fn, int only) {
    if (only != 0 && only != id) return;
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        pass = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs < budget_seconds;
    g_results.push_back({id, pass && in_budget, secs, budget_seconds, detail});
    std::printf("criterion %2d: %s  (%.1f s / budget %.0f s)  %s\n", id,
                (pass && in_budget) ? "PASS" : "FAIL", secs, budget_seconds, detail.c_str());
    std::fflush(stdout);
}

// 1. Oracle equivalence (exact): alpha=1, vertical + keyhole vs residue.
bool criterion1(std::string& detail) {
    Rng beta_rng(20260809);
    double worst = 0.0;
    long checked = 0;
    for (int n : {2, 5, 10, 20, 30}) {
        for (int rep = 0; rep < 100; ++rep) {
            const Spectrum s =
                eig_full(sample_tridiag(1, n, SeedPlan{1000 + n, (std::uint64_t)rep}));
            const double beta = 0.5 + beta_rng.uniform();
            const ModelParams p = ModelParams::from_beta(1, n, beta);
            const double oracle = f_residue_oracle(s, beta).log_i;
            const double dv = std::abs(f_vertical(s, p).log_i - oracle) / std::abs(oracle);
            const double dk = std::abs(f_keyhole(s, p).log_i - oracle) / std::abs(oracle);
            worst = std::max({worst, dv, dk});
            ++checked;
        }
    }
    detail = "max rel err " + std::to_string(worst) + " over " + std::to_string(checked) +
             " spectra x 2 methods";
    return worst < 1e-6;
}

// 2. Oracle equivalence (statistical): alpha=2 vs sphere MC, 3-sigma band.
bool criterion2(std::string& detail) {
    Rng beta_rng(413);
    long trials = 0, hits = 0;
    for (int n : {4, 8, 16}) {
        for (int rep = 0; rep < 50; ++rep) {
            const Spectrum s =
                eig_full(sample_tridiag(2, n, SeedPlan{2000 + n, (std::uint64_t)rep}));
            const double beta = 0.5 + beta_rng.uniform();
            const ModelParams p = ModelParams::from_beta(2, n, beta);
            const SphereMcResult mc =
                f_sphere_mc_oracle_spectrum(s.values, 2, beta, 1000000, 3000 + rep + n);
            const double band = 3.0 * mc.std_error;
            const bool ok_v = std::abs(f_vertical(s, p).f - mc.fe.f) <= band;
            const bool ok_k = std::abs(f_keyhole(s, p).f - mc.fe.f) <= band;
            ++trials;
            if (ok_v && ok_k) ++hits;
        }
    }
    const double frac = static_cast<double>(hits) / trials;
    detail = "inside 3-sigma in " + std::to_string(hits) + "/" + std::to_string(trials);
    return frac >= 0.95;
}

// 3. Negative-critical Gaussian limit with the N-trend.
bool criterion3(std::string& detail) {
    ExperimentConfig cfg;
    cfg.suite = "transition";
    cfg.ensemble.alpha = 2;
    cfg.ensemble.n = 2000;
    cfg.n_grid = {500, 2000, 8000};
    cfg.b_grid = {-1.0};
    cfg.m_replicas = 1000;
    cfg.master_seed = 30001;
    cfg.ks_threshold = 0.08;
    const SuiteSummary sum = run_suite(cfg);
    double ks2000 = NAN;
    std::string kss = "ks:";
    std::vector<std::pair<int, double>> seq;
    for (const auto& c : sum.cells) {
        seq.emplace_back(c.n, c.ks);
        kss += " N" + std::to_string(c.n) + "=" + std::to_string(c.ks);
        if (c.n == 2000) ks2000 = c.ks;
    }
    std::sort(seq.begin(), seq.end());
    bool trend = true;
    for (std::size_t i = 1; i < seq.size(); ++i) trend = trend && seq[i].second <= seq[i - 1].second;
    detail = kss + " trend_nonincreasing=" + (trend ? "yes" : "no");
    return ks2000 < 0.08 && trend;
}

// 4. Positive-critical mixture: comparative KS plus the variance band.
bool criterion4(std::string& detail) {
    ExperimentConfig cfg;
    cfg.suite = "transition";
    cfg.ensemble.alpha = 2;
    cfg.ensemble.n = 2000;
    cfg.b_grid = {2.0};
    cfg.m_replicas = 1000;
    cfg.master_seed = 40001;
    const SuiteSummary sum = run_suite(cfg);
    const CellSummary& c = sum.cells.at(0);
    const bool closer = c.detail["mixture_closer"].get<bool>();
    const bool var_ok = c.detail["var_ok"].get<bool>();
    detail = "ks_conv=" + std::to_string(c.ks) +
             " ks_gauss=" + std::to_string(c.detail["ks_vs_gaussian"].get<double>()) +
             " var=" + std::to_string(c.var) +
             " target=" + std::to_string(c.detail["var_target"].get<double>());
    return closer && var_ok;
}

// 5. CLT1/CLT2 at both alphas, with and without the J = 0.5 spike.
bool criterion5(std::string& detail) {
    bool all = true;
    detail = "ks:";
    for (const std::string suite : {"clt1", "clt2"}) {
        for (int alpha : {1, 2}) {
            for (double j : {0.0, 0.5}) {
                ExperimentConfig cfg;
                cfg.suite = suite;
                cfg.ensemble.alpha = alpha;
                cfg.ensemble.n = 4000;
                cfg.ensemble.spike_j = j;
                cfg.clt_c = 1.0;
                cfg.m_replicas = 2000;
                cfg.master_seed = 50001 + alpha * 10 + static_cast<int>(j * 10);
                cfg.ks_threshold = 0.08;
                const SuiteSummary sum = run_suite(cfg);
                const CellSummary& c = sum.cells.at(0);
                detail += " " + suite + "/a" + std::to_string(alpha) + "/J" +
                          std::to_string(j).substr(0, 3) + "=" + std::to_string(c.ks);
                all = all && c.pass;
            }
        }
    }
    return all;
}

// 6. Independence of (xi1, xi2) plus the marginal laws.
bool criterion6(std::string& detail) {
    ExperimentConfig cfg;
    cfg.suite = "independence";
    cfg.ensemble.alpha = 2;
    cfg.ensemble.n = 4000;
    cfg.m_replicas = 4000;
    cfg.master_seed = 60001;
    cfg.ks_threshold = 0.08;
    cfg.corr_threshold = 0.05;
    cfg.chi2_p_min = 0.01;
    const SuiteSummary sum = run_suite(cfg);
    const CellSummary& c = sum.cells.at(0);
    detail = "corr=" + std::to_string(c.detail["corr"].get<double>()) +
             " chi2_p=" + std::to_string(c.detail["chi2_p"].get<double>()) +
             " ks_xi1=" + std::to_string(c.detail["ks_xi1_gaussian"].get<double>()) +
             " ks_xi2=" + std::to_string(c.detail["ks_xi2_tw"].get<double>());
    return c.pass;
}

// 7. Corner-minor accuracy at N = 1e5.
bool criterion7(std::string& detail) {
    ExperimentConfig cfg;
    cfg.suite = "corner_accuracy";
    cfg.ensemble.alpha = 2;
    cfg.ensemble.n = 100000;
    cfg.m_replicas = 100;
    cfg.master_seed = 70001;
    const SuiteSummary sum = run_suite(cfg);
    const CellSummary& c = sum.cells.at(0);
    detail = "median=" + std::to_string(c.mean) + " p99=" + std::to_string(c.var) +
             " monotone_frac=" + std::to_string(c.detail["monotone_frac"].get<double>());
    return c.pass;
}

// 8. Log-determinant recursion against the eigenvalue route.
bool criterion8(std::string& detail) {
    ExperimentConfig cfg;
    cfg.suite = "recursion";
    cfg.ensemble.alpha = 2;
    cfg.ensemble.n = 4000;
    cfg.m_replicas = 200;
    cfg.master_seed = 80001;
    const SuiteSummary sum = run_suite(cfg);
    const CellSummary& c = sum.cells.at(0);
    detail = "sd=" + std::to_string(c.detail["sd"].get<double>()) +
             " bound=" + std::to_string(c.detail["bound_3_sigma_bar_sq"].get<double>());
    return c.pass;
}

// 9. Universality: Gaussian vs Rademacher fluctuation samples.
bool criterion9(std::string& detail) {
    ExperimentConfig cfg;
    cfg.suite = "universality";
    cfg.ensemble.alpha = 2;
    cfg.ensemble.n = 2000;
    cfg.ensemble.entry_law = EntryLaw::rademacher;
    cfg.b_grid = {-1.0};
    cfg.m_replicas = 1000;
    cfg.master_seed = 90001;
    cfg.mutual_ks_threshold = 0.10;
    cfg.control_ks_threshold = 0.06;
    const SuiteSummary sum = run_suite(cfg);
    const CellSummary& c = sum.cells.at(0);
    detail = "mutual_ks=" + std::to_string(c.detail["mutual_ks"].get<double>()) +
             " control_ks=" + std::to_string(c.detail["control_ks"].get<double>());
    return c.pass;
}

// 10. The fast invariant bundle.
bool criterion10(std::string& detail) {
    const VerifyReport rep = run_verify();
    long failed = 0;
    for (const auto& c : rep.checks)
        if (!c.pass) ++failed;
    detail = std::to_string(rep.checks.size()) + " checks, " + std::to_string(failed) +
             " failed, " + std::to_string(rep.seconds) + " s";
    return rep.pass && rep.seconds < 60.0;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);

    run_criterion(1, 60, criterion1, only);
    run_criterion(2, 600, criterion2, only);
    run_criterion(3, 1800, criterion3, only);
    run_criterion(4, 1800, criterion4, only);
    run_criterion(5, 1800, criterion5, only);
    run_criterion(6, 2700, criterion6, only);
    run_criterion(7, 600, criterion7, only);
    run_criterion(8, 600, criterion8, only);
    run_criterion(9, 3600, criterion9, only);
    run_criterion(10, 60, criterion10, only);

    bool all = true;
    for (const auto& r : g_results) all = all && r.pass;
    std::printf("acceptance: %zu criteria run, %s\n", g_results.size(),
                all ? "ALL PASS" : "FAILURES PRESENT");
    return all ? 0 : 2;
}
