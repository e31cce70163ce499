#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssk/ensembles.hpp"
#include "ssk/experiments.hpp"
#include "ssk/free_energy.hpp"
#include "ssk/limit_laws.hpp"
#include "ssk/spectral.hpp"
#include "ssk/verify.hpp"

namespace {

using nlohmann::json;

std::vector<double> parse_spectrum(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    std::sort(out.begin(), out.end(), std::greater<double>());
    return out;
}

void emit(const std::string& payload, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << payload;
        if (!payload.empty() && payload.back() != '\n') std::cout << "\n";
    } else {
        std::ofstream f(out_path);
        if (!f) throw ssk::error("cannot open output file: " + out_path);
        f << payload;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spherical Sherrington-Kirkpatrick edge toolkit"};
    app.require_subcommand(1);

    int alpha = 2, n = 0, threads = 0;
    std::uint64_t seed = 1;
    double b_param = 0.0, beta = 0.0, j_spike = 0.0;
    bool have_b = false, have_beta = false;
    std::string method = "auto", format = "json", out_path, config_path, spectrum_csv,
                law = "gaussian", emit_kind = "matrix";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "master seed");
        cmd->add_option("--threads", threads,
                        "worker threads (default: SSK_EDGE_THREADS or hardware)");
        cmd->add_option("--out", out_path, "write the payload to a file instead of stdout");
        cmd->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
    };

    CLI::App* sample = app.add_subcommand("sample", "sample a disorder matrix or its spectrum");
    sample->add_option("--alpha", alpha)->check(CLI::IsMember({1, 2}));
    sample->add_option("--n", n)->required();
    sample->add_option("--law", law)->check(CLI::IsMember({"gaussian", "rademacher", "uniform"}));
    sample->add_option("--j", j_spike, "sub-critical spike J in [0,1)");
    sample->add_option("--emit", emit_kind)->check(CLI::IsMember({"matrix", "spectrum"}));
    add_common(sample);

    CLI::App* fe = app.add_subcommand("free-energy", "evaluate the free energy of one replica");
    fe->add_option("--alpha", alpha)->check(CLI::IsMember({1, 2}));
    fe->add_option("--n", n);
    fe->add_option("--spectrum", spectrum_csv, "comma-separated eigenvalues (else sampled)");
    fe->add_option("--b", b_param)->each([&](const std::string&) { have_b = true; });
    fe->add_option("--beta", beta)->each([&](const std::string&) { have_beta = true; });
    fe->add_option("--j", j_spike);
    fe->add_option("--method", method)
        ->check(CLI::IsMember({"auto", "vertical", "keyhole", "steepest", "residue", "sphere-mc"}));
    add_common(fe);

    CLI::App* tw = app.add_subcommand("tw-table", "emit an empirical Tracy-Widom CDF table");
    int tw_n_internal = 100000;
    long tw_m = 100000;
    tw->add_option("--alpha", alpha)->check(CLI::IsMember({1, 2}));
    tw->add_option("--n-internal", tw_n_internal);
    tw->add_option("--m", tw_m);
    add_common(tw);

    CLI::App* exp = app.add_subcommand("experiment", "run a Monte Carlo suite from a config");
    exp->add_option("--config", config_path)->required();
    exp->add_option("--threads", threads);
    exp->add_option("--out", out_path, "override the records path");

    CLI::App* verify = app.add_subcommand("verify", "run the fast invariant bundle");
    verify->add_option("--threads", threads);

    CLI::App* report = app.add_subcommand("report", "rebuild a suite summary from records");
    std::string records_path;
    report->add_option("records", records_path)->required();
    report->add_option("--config", config_path,
                       "config JSON (default: <records>.config.json)");
    report->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);  // prints to stderr, exit code 1 on error
    }

    try {
        if (*sample) {
            if (n < 2) throw ssk::error("sample: need --n >= 2");
            ssk::EnsembleSpec spec;
            spec.alpha = alpha;
            spec.n = n;
            spec.entry_law = ssk::entry_law_from_string(law);
            spec.spike_j = j_spike;
            spec.validate();
            json payload;
            if (spec.entry_law == ssk::EntryLaw::gaussian) {
                ssk::TridiagonalMatrix t =
                    (j_spike > 0.0) ? ssk::sample_tridiag_spiked(alpha, n, j_spike, {seed, 0})
                                    : ssk::sample_tridiag(alpha, n, {seed, 0});
                if (emit_kind == "matrix") {
                    payload = json{{"kind", "tridiagonal"},
                                   {"alpha", alpha},
                                   {"n", n},
                                   {"diag", t.diag},
                                   {"offdiag", t.offdiag}};
                } else {
                    payload = ssk::eig_full(t);
                }
            } else {
                const ssk::DenseMatrix w = ssk::sample_dense(spec, {seed, 0});
                if (emit_kind == "matrix") throw ssk::error("sample: dense laws emit spectra only");
                payload = ssk::eig_dense(w);
            }
            emit(payload.dump(), out_path);
            return 0;
        }

        if (*fe) {
            ssk::Spectrum s;
            if (!spectrum_csv.empty()) {
                s.values = parse_spectrum(spectrum_csv);
                s.n = static_cast<int>(s.values.size());
                n = s.n;
            } else {
                if (n < 2) throw ssk::error("free-energy: need --n or --spectrum");
                s = ssk::eig_full(ssk::sample_tridiag(alpha, n, {seed, 0}));
            }
            if (!have_b && !have_beta) throw ssk::error("free-energy: need --b or --beta");
            const ssk::ModelParams params = have_b
                                                ? ssk::ModelParams::from_b(alpha, n, b_param, j_spike)
                                                : ssk::ModelParams::from_beta(alpha, n, beta, j_spike);
            ssk::FreeEnergyResult r;
            if (method == "residue") {
                if (alpha != 1) throw ssk::error("free-energy: residue oracle needs --alpha 1");
                r = ssk::f_residue_oracle(s, params.beta);
            } else if (method == "sphere-mc") {
                const ssk::SphereMcResult mc =
                    ssk::f_sphere_mc_oracle_spectrum(s.values, alpha, params.beta, 200000, seed);
                r = mc.fe;
            } else if (method == "vertical") {
                r = ssk::f_vertical(s, params);
            } else if (method == "keyhole") {
                r = ssk::f_keyhole(s, params);
            } else if (method == "steepest") {
                r = ssk::f_steepest(s, params);
            } else {
                const ssk::FeMethod picked = ssk::detail::pick_method("auto", params.b);
                r = (picked == ssk::FeMethod::vertical)   ? ssk::f_vertical(s, params)
                    : (picked == ssk::FeMethod::keyhole) ? ssk::f_keyhole(s, params)
                                                         : ssk::f_steepest(s, params);
            }
            emit(json(r).dump(), out_path);
            return 0;
        }

        if (*tw) {
            const ssk::ReferenceDistribution table =
                ssk::tw_table(alpha, tw_n_internal, tw_m, seed, threads);
            std::ostringstream os;
            ssk::write_tw_csv(os, table);
            emit(os.str(), out_path);
            return 0;
        }

        if (*exp) {
            std::ifstream in(config_path);
            if (!in) throw ssk::error("cannot open config: " + config_path);
            json j;
            try {
                j = json::parse(in);
            } catch (const json::parse_error& e) {
                std::cerr << "config parse error at byte " << e.byte << ": " << e.what() << "\n";
                return 1;
            }
            ssk::ExperimentConfig cfg = j.get<ssk::ExperimentConfig>();
            if (threads > 0) cfg.threads = threads;
            if (!out_path.empty()) cfg.records_path = out_path;
            const ssk::SuiteSummary sum = ssk::run_suite(cfg);
            std::cout << json(sum).dump(2) << "\n";
            std::cerr << "suite " << sum.suite << (sum.pass ? " PASS" : " FAIL") << "\n";
            return sum.pass ? 0 : 2;
        }

        if (*verify) {
            const ssk::VerifyReport rep = ssk::run_verify(threads);
            for (const auto& c : rep.checks)
                std::cerr << (c.pass ? "pass  " : "FAIL  ") << c.name
                          << (c.detail.empty() ? "" : "  [" + c.detail + "]") << "\n";
            std::cerr << (rep.pass ? "verify PASS " : "verify FAIL ") << rep.checks.size()
                      << " checks in " << rep.seconds << " s\n";
            json out;
            out["pass"] = rep.pass;
            out["checks"] = json::array();
            for (const auto& c : rep.checks)
                out["checks"].push_back({{"name", c.name}, {"pass", c.pass}});
            out["seconds"] = rep.seconds;
            std::cout << out.dump(2) << "\n";
            return rep.pass ? 0 : 2;
        }

        if (*report) {
            const std::string cfg_path =
                config_path.empty() ? records_path + ".config.json" : config_path;
            std::ifstream cin_(cfg_path);
            if (!cin_) throw ssk::error("cannot open config sidecar: " + cfg_path);
            const ssk::ExperimentConfig cfg = json::parse(cin_).get<ssk::ExperimentConfig>();
            const ssk::RecordSet records = ssk::load_records(records_path);
            if (records.empty()) throw ssk::error("no records in " + records_path);
            const ssk::SuiteSummary sum = ssk::summarize_suite(cfg, records);
            if (format == "csv")
                emit(ssk::summary_csv(sum), out_path);
            else
                emit(json(sum).dump(2), out_path);
            return sum.pass ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
