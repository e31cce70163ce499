#include <catch2/catch_amalgamated.hpp>

#include "ssk/experiments.hpp"
#include "ssk/verify.hpp"

#include <cstdio>
#include <filesystem>

using namespace ssk;

namespace {
ExperimentConfig small_config(const std::string& suite) {
    ExperimentConfig cfg;
    cfg.suite = suite;
    cfg.ensemble.alpha = 2;
    cfg.ensemble.n = 150;
    cfg.m_replicas = 60;
    cfg.master_seed = 777;
    cfg.threads = 0;
    return cfg;
}

nlohmann::json strip_wall_time(const ReplicaRecord& r) {
    nlohmann::json j = r;
    j.erase("wall_time");
    return j;
}
}  // namespace

TEST_CASE("config JSON round trip and hash stability") {
    ExperimentConfig cfg = small_config("transition");
    cfg.b_grid = {-1.0, 2.0};
    const nlohmann::json j = cfg;
    const ExperimentConfig back = j.get<ExperimentConfig>();
    REQUIRE(config_hash(back) == config_hash(cfg));
    REQUIRE(back.b_grid == cfg.b_grid);
    ExperimentConfig other = cfg;
    other.master_seed += 1;
    REQUIRE(config_hash(other) != config_hash(cfg));
}

TEST_CASE("replay determinism across thread counts") {
    ExperimentConfig cfg = small_config("transition");
    cfg.b_grid = {-0.8};
    cfg.threads = 1;
    const RecordSet a = compute_suite_records(cfg, {});
    cfg.threads = 4;
    const RecordSet b = compute_suite_records(cfg, {});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        REQUIRE(strip_wall_time(a[i]) == strip_wall_time(b[i]));
}

TEST_CASE("resume reproduces an uninterrupted run") {
    ExperimentConfig cfg = small_config("independence");
    const RecordSet full = compute_suite_records(cfg, {});
    RecordSet partial(full.begin(), full.begin() + 17);
    const RecordSet resumed = compute_suite_records(cfg, std::move(partial));
    REQUIRE(resumed.size() == full.size());
    for (std::size_t i = 0; i < full.size(); ++i)
        REQUIRE(strip_wall_time(resumed[i]) == strip_wall_time(full[i]));
}

TEST_CASE("records persist as JSON lines with the contract fields") {
    ExperimentConfig cfg = small_config("clt2");
    cfg.records_path = std::filesystem::temp_directory_path() / "ssk_test_records.jsonl";
    const SuiteSummary sum = run_suite(cfg);
    REQUIRE(sum.cells.size() == 1);
    const RecordSet loaded = load_records(cfg.records_path);
    REQUIRE(loaded.size() == 60);
    const nlohmann::json j = loaded.front();
    for (const char* key : {"replica_index", "b", "seed", "f", "fluct_stat", "xi1", "xi2",
                            "gap", "counts", "method", "wall_time"})
        REQUIRE(j.contains(key));
    // config sidecar written next to the records
    REQUIRE(std::filesystem::exists(cfg.records_path + ".config.json"));
    // re-running from the persisted file is a no-op on the record set
    const RecordSet again = load_records(cfg.records_path);
    const SuiteSummary sum2 = summarize_suite(cfg, again);
    REQUIRE(nlohmann::json(sum2) == nlohmann::json(sum));
    std::filesystem::remove(cfg.records_path);
    std::filesystem::remove(cfg.records_path + ".config.json");
}

TEST_CASE("summary is order independent") {
    ExperimentConfig cfg = small_config("clt1");
    RecordSet rs = compute_suite_records(cfg, {});
    const nlohmann::json s1 = summarize_suite(cfg, rs);
    std::reverse(rs.begin(), rs.end());
    const nlohmann::json s2 = summarize_suite(cfg, rs);
    REQUIRE(s1 == s2);
}

TEST_CASE("summary csv layout") {
    ExperimentConfig cfg = small_config("clt2");
    const SuiteSummary sum = summarize_suite(cfg, compute_suite_records(cfg, {}));
    const std::string csv = summary_csv(sum);
    REQUIRE(csv.rfind("suite,b,n,m,ks,ks_p,mean,var,pass\n", 0) == 0);
    REQUIRE(csv.find("clt2,") != std::string::npos);
}

TEST_CASE("universality suite produces three tagged arms") {
    ExperimentConfig cfg = small_config("universality");
    cfg.ensemble.entry_law = EntryLaw::rademacher;
    cfg.b_grid = {-0.8};
    cfg.m_replicas = 30;
    const RecordSet rs = compute_suite_records(cfg, {});
    long a = 0, b = 0, alt = 0;
    for (const auto& r : rs) {
        if (r.tag == "gaussian_a") ++a;
        if (r.tag == "gaussian_b") ++b;
        if (r.tag == "alt_law") ++alt;
    }
    REQUIRE(a == 30);
    REQUIRE(b == 30);
    REQUIRE(alt == 30);
    // arms are distinct streams
    REQUIRE(rs[0].seed != 0);
    const SuiteSummary sum = summarize_universality(cfg, rs);
    REQUIRE(sum.cells.size() == 1);
    REQUIRE(sum.cells[0].detail.contains("mutual_ks"));
    REQUIRE(sum.cells[0].detail.contains("control_ks"));
}

TEST_CASE("degenerate-gap resamples come from the reserved stream") {
    // force a resample by replaying the decision logic on a healthy sample:
    // the reserved-stream plan differs from the primary one
    const SeedPlan primary{123, 7};
    const SeedPlan reserved = detail::resample_plan(123, 7, 1);
    REQUIRE(primary.stream_seed() != reserved.stream_seed());
}

TEST_CASE("edge suite counts thresholds behave") {
    ExperimentConfig cfg = small_config("edge");
    cfg.ensemble.n = 400;
    cfg.m_replicas = 60;
    const RecordSet rs = compute_suite_records(cfg, {});
    const SuiteSummary sum = summarize_edge(cfg, rs);
    REQUIRE(sum.cells.size() == 1);
    const auto& mean_counts = sum.cells[0].detail["mean_counts"];
    // counts are nondecreasing in the threshold x
    for (int i = 1; i < 4; ++i)
        REQUIRE(mean_counts[i].get<double>() >= mean_counts[i - 1].get<double>());
    // gap positivity
    REQUIRE(sum.cells[0].detail["gap_quantiles"][0].get<double>() > 0.0);
}

TEST_CASE("stickiness suite with J = 0 reports exact zeros") {
    ExperimentConfig cfg = small_config("stickiness");
    cfg.ensemble.n = 80;
    cfg.b_grid = {0.0};
    cfg.m_replicas = 10;
    const RecordSet rs = compute_suite_records(cfg, {});
    for (const auto& r : rs) REQUIRE(r.fluct_stat == 0.0);
    const SuiteSummary sum = summarize_stickiness(cfg, rs);
    REQUIRE(sum.pass);
}

TEST_CASE("verify bundle passes inside its budget") {
    const VerifyReport rep = run_verify();
    for (const auto& c : rep.checks) {
        INFO(c.name << " " << c.detail);
        CHECK(c.pass);
    }
    REQUIRE(rep.pass);
    REQUIRE(rep.seconds < 60.0);
}
