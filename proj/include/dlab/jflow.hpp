#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dlab/estimates.hpp"
#include "dlab/grid.hpp"
#include "dlab/hermitian.hpp"

namespace dlab {

struct FlowState {
  double t = 0.0;
  ScalarField phi;
  double dt_last = 0.0;
  double rhs_sup = 0.0;
  double positivity_margin = 0.0;  // smallest eigenvalue of chi_phi
};

enum class Integrator { rk4, implicit_euler };

struct FlowOptions {
  Integrator integrator = Integrator::rk4;
  double dt = 0.05;            // target step; RK4 further caps it by kappa / Lambda_h
  double kappa = 0.5;
  int max_halvings = 20;
  double newton_tolerance = 1e-11;  // implicit steps: sup of the step residual
  int newton_max_iterations = 30;
  double monitor_tolerance = 1e-6;  // relative slack of the dphi/dt maximum principle
  bool attach_estimates = true;
  std::uint64_t seed = 0;  // bisectional sampling for the attached estimates
  int bisectional_samples = 64;
  double estimate_tolerance = 1e-6;

  void validate() const;
};

// F - log(tr_{chi_phi} omega / n)
ScalarField flow_rhs(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& phi,
                     const ScalarField& F);
// c - tr_{chi_phi} omega / n
ScalarField classic_jflow_rhs(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& phi,
                              double c);

// sup (largest eigenvalue of h / tr_{chi_phi} omega) times the largest
// Laplacian symbol on the grid: the stiffness of the linearized flow.
double stiffness(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& phi);

FlowState initial_state(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& F,
                        const ScalarField& phi0);

FlowState flow_step(const FlowState& state, const HermitianMetricField& g, const HermitianMetricField& chi,
                    const ScalarField& F, double dt_target, const FlowOptions& opts = {});

struct MonitorRecord {
  double t = 0.0;
  double dpdt_sup = 0.0;
  bool violated = false;
};

struct Trajectory {
  std::vector<FlowState> states;     // snapshots at monitor times, first at t = 0
  std::vector<ScalarField> dphi_dt;  // flow_rhs at each snapshot
  std::vector<MonitorRecord> monitor;
  std::optional<EstimateParameters> parameters;
  std::optional<TrajectoryEstimates> estimates;
  double T = 0.0;
  int steps = 0;
  bool monitor_violation = false;

  std::vector<Snapshot> snapshots() const;
};

Trajectory run_flow(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& F,
                    const ScalarField& phi0, double T, double monitor_interval, const FlowOptions& opts = {});

}  // namespace dlab
