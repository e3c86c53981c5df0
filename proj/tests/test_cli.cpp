#include <doctest.h>

#include "carlab/config.hpp"
#include "carlab/runner.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

using namespace carlab;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CARLAB_CLI) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string configs = CARLAB_CONFIG_DIR;
const fs::path scratch = fs::path(CARLAB_SCRATCH_DIR) / "cli_runs";

}  // namespace

TEST_CASE("config defaults") {
    ExperimentConfig c = parse_config_text("{}");
    CHECK(c.n_x == 64);
    CHECK(c.n_t == 64);
    CHECK(c.T == 1.0);
    CHECK(c.lambda == 1.0);
    CHECK(c.count == 10);
    CHECK(c.observed == std::vector<std::string>{"right"});
    CHECK(c.domain().dim() == 1);
}

TEST_CASE("config errors name the key") {
    CHECK(error_of(R"({"weight": {"lamda": 2}})").find("lamda") != std::string::npos);
    CHECK(error_of(R"({"domain": {"observed": []}})").find("domain.observed") != std::string::npos);
    CHECK(error_of(R"({"grid": {"n_x": "many"}})").find("grid.n_x") != std::string::npos);
    CHECK(error_of("{not json").size() > 0);
    CHECK(error_of(R"({"grid": {"n_x": 32}})").empty());
}

TEST_CASE("tau grid forms") {
    ExperimentConfig a = parse_config_text(R"({"weight": {"tau": [1, 2, 5]}})");
    CHECK(a.tau.resolve() == std::vector<double>{1, 2, 5});
    ExperimentConfig b = parse_config_text(R"({"weight": {"tau": {"min": 2, "ratio": 3, "count": 3}}})");
    auto v = b.tau.resolve();
    REQUIRE(v.size() == 3);
    CHECK(v[2] == doctest::Approx(18.0));
}

TEST_CASE("experiment name must match subcommand") {
    ExperimentConfig c = parse_config(configs + "/remark.json");
    CHECK_THROWS_AS(run_experiment("energy-identity", c), ConfigError);
    CHECK_THROWS_AS(run_experiment("no-such-thing", c), ConfigError);
}

TEST_CASE("exit codes") {
    fs::remove_all(scratch);
    CHECK(run_cli("check-weight --config " + configs + "/remark.json --out " + (scratch / "remark").string()) == 0);
    CHECK(run_cli("check-weight --config " + configs + "/condition1_left.json --out " + (scratch / "left").string()) == 1);
    CHECK(run_cli("frobnicate --config " + configs + "/remark.json") == 2);
    CHECK(run_cli("check-weight") == 2);
    CHECK(run_cli("check-weight --config " + configs + "/missing.json") == 2);

    const fs::path bad = scratch / "bad.json";
    std::ofstream(bad) << R"({"weight": {"lamda": 3}})";
    CHECK(run_cli("check-weight --config " + bad.string() + " --out " + (scratch / "bad").string()) == 2);

    for (const char* f : {"report.json", "report.csv", "manifest.json"})
        CHECK(fs::exists(scratch / "remark" / f));
}

TEST_CASE("artifacts are reproducible") {
    const std::string cfg = configs + "/stability.json";
    REQUIRE(run_cli("stability-sweep --config " + cfg + " --out " + (scratch / "a").string()) == 0);
    REQUIRE(run_cli("stability-sweep --config " + cfg + " --out " + (scratch / "b").string()) == 0);
    for (const char* f : {"report.json", "report.csv"}) {
        const std::string x = slurp(scratch / "a" / f);
        CHECK(!x.empty());
        CHECK(x == slurp(scratch / "b" / f));
    }
    REQUIRE(run_cli("stability-sweep --seed 99 --config " + cfg + " --out " + (scratch / "c").string()) == 0);
    CHECK(slurp(scratch / "a" / "report.json") != slurp(scratch / "c" / "report.json"));
    const std::string manifest = slurp(scratch / "c" / "manifest.json");
    CHECK(manifest.find("\"seed\": 99") != std::string::npos);
}
