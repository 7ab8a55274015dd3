#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>

#include "dlab/config.hpp"

namespace dlab {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int numerical_failure = 1;
inline constexpr int config_error = 2;
inline constexpr int monitor_violation = 3;
}  // namespace exit_code

struct RunOptions {
  bool strict = false;  // monitor violations fail the process
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<Mode> mode;
};

struct RunOutcome {
  int exit_code = exit_code::ok;
  nlohmann::json report;
  std::filesystem::path out_dir;
};

// Runs the configured pipeline and writes report.json, manifest.json and,
// for flows, timeseries.csv into the output directory. Module errors are
// recorded in the report with the failing stage; ConfigError propagates.
RunOutcome run_experiment(ExperimentConfig config, const RunOptions& opts = {});

// Seed, mode and library versions; no timestamps.
nlohmann::json run_manifest(const ExperimentConfig& config);

}  // namespace dlab
