#include "carlab/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Carleman-weight and inverse-problem laboratory for the Schrodinger equation"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", carlab::carlab_version);

    std::string config_path, out_dir;
    std::int64_t seed = -1;
    for (const auto& name : carlab::subcommands()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "artifact directory (default: config 'output')");
        sub->add_option("--seed", seed, "override ensemble.seed")->check(CLI::NonNegativeNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }
    const std::string sub = app.get_subcommands().front()->get_name();

    std::string bytes;
    carlab::ExperimentConfig config;
    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw carlab::ConfigError("--config: cannot open '" + config_path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        bytes = ss.str();
        config = carlab::parse_config_text(bytes);
        if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    } catch (const carlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_usage;
    }

    carlab::RunResult result;
    try {
        result = carlab::run_experiment(sub, config);
    } catch (const carlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << sub << " failed: " << e.what() << "\n";
        return exit_fail;
    }

    const std::string dir = out_dir.empty() ? config.output : out_dir;
    try {
        carlab::write_artifacts(dir, sub, config, config_path, bytes, result);
    } catch (const std::exception& e) {
        std::cerr << "cannot write artifacts: " << e.what() << "\n";
        return exit_fail;
    }
    std::cout << sub << ": " << (result.pass ? "PASS" : "FAIL") << " (artifacts in " << dir << ")\n";
    return result.pass ? exit_pass : exit_fail;
}
