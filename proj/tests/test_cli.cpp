#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(SSK_CLI_PATH) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    CliResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

}  // namespace

TEST_CASE("sample is byte-reproducible") {
    const CliResult a = run_cli("sample --alpha 2 --n 4 --seed 7");
    const CliResult b = run_cli("sample --alpha 2 --n 4 --seed 7");
    REQUIRE(a.exit_code == 0);
    REQUIRE(a.out == b.out);
    const auto j = nlohmann::json::parse(a.out);
    REQUIRE(j["kind"] == "tridiagonal");
    REQUIRE(j["diag"].size() == 4);
    REQUIRE(j["offdiag"].size() == 3);
}

TEST_CASE("free-energy residue example") {
    const CliResult r =
        run_cli("free-energy --alpha 1 --n 2 --spectrum 1,-1 --beta 1 --method residue");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    // log I/C = log sinh 2
    REQUIRE(std::abs(j["diagnostics"]["log_i_over_c"].get<double>() -
                     std::log(std::sinh(2.0))) < 1e-9);
    REQUIRE(j["method"] == "residue_oracle");
    REQUIRE(j.contains("f"));
    REQUIRE(j.contains("log_i"));
}

TEST_CASE("missing config exits with code 1") {
    const CliResult r = run_cli("experiment --config /nonexistent/missing.json");
    REQUIRE(r.exit_code == 1);
}

TEST_CASE("unknown flags are hard errors") {
    const CliResult r = run_cli("sample --alpha 2 --n 4 --definitely-not-a-flag 1");
    REQUIRE(r.exit_code != 0);
}

TEST_CASE("tw-table emits csv with header") {
    const CliResult r = run_cli("tw-table --alpha 2 --n-internal 10000 --m 10000 --seed 3");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.rfind("# tw_table alpha=2", 0) == 0);
    REQUIRE(r.out.find("x,cdf") != std::string::npos);
}

TEST_CASE("spectrum emission is sorted descending") {
    const CliResult r = run_cli("sample --alpha 2 --n 16 --seed 9 --emit spectrum");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    const auto vals = j["values"].get<std::vector<double>>();
    REQUIRE(vals.size() == 16);
    for (std::size_t i = 1; i < vals.size(); ++i) REQUIRE(vals[i - 1] >= vals[i]);
}
