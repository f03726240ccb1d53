#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>

#include "wml/cli.hpp"
#include "wml/config.hpp"

using namespace wml;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("wmlab_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

int run(RunConfig cfg, const fs::path& out, std::string* err = nullptr) {
    cfg.out = out.string();
    std::ostringstream log, e;
    const int code = dispatch(cfg, log, e);
    if (err) *err = e.str();
    return code;
}

} // namespace

TEST_CASE("key-value and JSON configs are equivalent") {
    RunConfig a, b;
    apply_config_text(a, "nu = 0.25\n# comment\n[simulate]\ndr = 1e-4\nsnapshot_times = [0.4, 0.3]\n[verify_rate]\nnus = 1, 2\n");
    apply_config_text(b, R"({"nu": 0.25, "simulate": {"dr": 1e-4, "snapshot_times": [0.4, 0.3]}, "verify_rate": {"nus": [1, 2]}})");
    CHECK(config_entries(a) == config_entries(b));
    CHECK(a.nu == 0.25);
    CHECK(a.sim_dr == 1e-4);
    CHECK(a.snapshot_times == std::vector<double>{0.4, 0.3});
    CHECK(a.rate_nus == std::vector<double>{1, 2});
}

TEST_CASE("unknown keys and malformed values are rejected") {
    RunConfig c;
    CHECK_THROWS_AS(apply_config_text(c, "nu_typo = 1"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(c, "nu = fast"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(c, R"({"simulate": {"nope": 1}})"), ConfigError);
}

TEST_CASE("validation lists every offending field") {
    RunConfig c;
    c.nu = -1;
    c.sim_cfl = 2;
    try {
        c.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.fields().size() == 2);
    }
    RunConfig ok;
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("every documented key round-trips through the config text") {
    RunConfig c;
    std::string text;
    for (const auto& [k, v] : config_entries(c)) text += k + " = " + v + "\n";
    RunConfig d;
    apply_config_text(d, text);
    CHECK(config_entries(c) == config_entries(d));
}

TEST_CASE("config failures exit with status 2 and a JSON record") {
    RunConfig c;
    c.subcommand = "profile";
    c.order = 5;
    std::string err;
    CHECK(run(c, scratch("bad"), &err) == exit_config);
    const auto rec = nlohmann::json::parse(err);
    CHECK(rec["error"] == "config");
    CHECK(rec["fields"].size() == 1);
}

TEST_CASE("numerical failures exit with status 3 and a module payload") {
    RunConfig c;
    c.subcommand = "parametrix";
    c.tol.zeroth_tail_rel = 1e-9;
    c.tau_slices = 8;
    c.xi_out = 3;
    const auto dir = scratch("numerical");
    CHECK(run(c, dir) == exit_numerical);
    const auto m = manifest(dir);
    CHECK(m["status"]["error"] == "numerical");
    CHECK(m["status"]["module"] == "parametrix_engine");
}

TEST_CASE("profile with k = 0 hits pi/2 at R = 1") {
    RunConfig c;
    c.subcommand = "profile";
    c.order = 0;
    const auto dir = scratch("profile0");
    REQUIRE(run(c, dir) == exit_ok);
    const auto m = manifest(dir);
    CHECK(m["results"]["u_at_R_equal_1"].get<double>() == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
    CHECK(m["files"].size() == 1);
    CHECK(fs::exists(dir / "approx_t0.csv"));
}

TEST_CASE("spectral tables have last-decade slope near 1") {
    RunConfig c;
    c.subcommand = "spectral";
    const auto dir = scratch("spectral");
    REQUIRE(run(c, dir) == exit_ok);
    CHECK(manifest(dir)["results"]["hi_slope"].get<double>() == doctest::Approx(1).epsilon(0.05));
}

TEST_CASE("identical config and seed give byte-identical CSVs; every file is in the manifest") {
    RunConfig c;
    c.subcommand = "profile";
    const auto a = scratch("det_a"), b = scratch("det_b");
    REQUIRE(run(c, a) == exit_ok);
    REQUIRE(run(c, b) == exit_ok);
    const auto m = manifest(a);
    CHECK(m["inputs_hash"] == manifest(b)["inputs_hash"]);
    std::set<std::string> listed;
    for (const auto& f : m["files"]) listed.insert(f.get<std::string>());
    std::set<std::string> present;
    for (const auto& e : fs::directory_iterator(a))
        if (e.path().filename() != "manifest.json") present.insert(e.path().filename().string());
    CHECK(listed == present);
    for (const auto& f : listed)
        if (f.ends_with(".csv")) CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("seed changes the input hash") {
    RunConfig c;
    c.subcommand = "profile";
    c.order = 0;
    const auto a = scratch("seed_a"), b = scratch("seed_b");
    REQUIRE(run(c, a) == exit_ok);
    c.seed += 1;
    REQUIRE(run(c, b) == exit_ok);
    CHECK(manifest(a)["inputs_hash"] != manifest(b)["inputs_hash"]);
}

TEST_CASE("verify-rate with nu = 1 reaches p within 10% of 2" * doctest::may_fail()) {
    RunConfig c;
    c.subcommand = "verify-rate";
    c.rate_nus = {1.0};
    const auto dir = scratch("verify");
    REQUIRE(run(c, dir) == exit_ok);
    const auto r = manifest(dir)["results"]["runs"][0];
    CHECK(r["fit"]["p"].get<double>() == doctest::Approx(2.0).epsilon(0.1));
}
