#pragma once

#include "carlab/config.hpp"
#include "carlab/report_io.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace carlab {

inline constexpr const char* carlab_version = "0.1.0";

struct RunResult {
    bool pass = false;
    nlohmann::json report;  // deterministic for a fixed (config, seed)
    CsvTable csv;
};

const std::vector<std::string>& subcommands();

// Throws ConfigError for usage problems (unknown subcommand, experiment name
// mismatch); other exceptions propagate.
RunResult run_experiment(const std::string& subcommand, const ExperimentConfig& config);

/// report.json, report.csv and manifest.json under dir (created if needed).
void write_artifacts(const std::string& dir, const std::string& subcommand, const ExperimentConfig& config,
                     const std::string& config_path, const std::string& config_bytes, const RunResult& result);

}  // namespace carlab
