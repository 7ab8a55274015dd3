#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "dlab/donaldson.hpp"
#include "dlab/fields.hpp"
#include "dlab/jflow.hpp"

namespace dlab {

enum class Mode { solve, flow, verify, abp };

// g0 + dd-bar u with u a random trigonometric polynomial; g0 random when absent.
struct MetricSpec {
  std::optional<HMat> constant;
  double amplitude = 0.0;  // bound on the operator norm of dd-bar u
  int frequency = 1;
  int modes = 4;
};

struct FSpec {
  enum class Kind { manufactured, explicit_coefficients } kind = Kind::manufactured;
  // manufactured: F = log(tr_{chi_phi*} omega / n) for a random phi*
  double amplitude = 0.3;
  int frequency = 2;
  int modes = 5;
  // explicit: constant + sum of modes
  double constant = 0.0;
  std::vector<TrigPolynomial::Mode> coefficients;
};

struct AbpSpec {
  int M_pts = 64;
  int quadratic_count = 100;
  int parabolic_count = 100;
};

struct ExperimentConfig {
  int n = 2;
  int N = 32;
  std::uint64_t seed = 0;
  double period = 1.0;
  MetricSpec omega, chi;
  FSpec F;
  Mode mode = Mode::solve;
  double T = 1.0;
  double monitor_interval = 0.1;
  FlowOptions flow;
  SolverOptions solver;
  double estimate_tolerance = 1e-6;
  double prop21_tolerance = 1e-5;
  double identity_tolerance = 1e-9;
  int bisectional_samples = 64;
  AbpSpec abp;
  std::filesystem::path output_dir = "out";

  void validate() const;
  int max_frequency() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& c);

struct Problem {
  TorusGrid grid;
  HermitianMetricField omega, chi;
  ScalarField F;
  std::optional<ScalarField> phi_star;
};

Problem build_problem(const ExperimentConfig& c);

const char* mode_name(Mode m);

}  // namespace dlab
