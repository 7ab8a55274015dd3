#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "dlab/grid.hpp"
#include "dlab/hermitian.hpp"

namespace dlab {

struct SolverOptions {
  int max_iterations = 50;
  double residual_tolerance = 1e-10;
  double linear_tolerance = 1e-10;
  double damping = 1.0;
  bool mean_zero = true;
  bool adaptive_forcing = true;
  int krylov_restart = 20;
  int krylov_max_iterations = 400;

  void validate() const;
};

struct SolveResult {
  ScalarField phi;
  int iterations = 0;
  double residual_sup = 0.0;
  int krylov_iterations = 0;
  std::vector<double> residual_history;
};

struct Condition {
  bool holds = false;
  double margin = 0.0;
  bool vacuous = false;  // reported for n = 1 where the predicate is empty
};

struct StabilityReport {
  Condition li_condition;
  Condition donaldson_necessary;
  Condition song_weinkove;
  Condition sun_cone;
  Condition thm12_hypothesis;
  double jflow_constant = 0.0;
};

// tr_{chi_phi} omega - n e^F
ScalarField trace_residual(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& phi,
                           const ScalarField& F);
// log(tr_{chi_phi*} omega / n)
ScalarField manufacture_F(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& phi_star);

SolveResult newton_solve(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& F,
                         const SolverOptions& opts = {}, const std::optional<ScalarField>& initial = std::nullopt);

double jflow_constant(const HermitianMetricField& g, const HermitianMetricField& chi);

StabilityReport stability_report(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& F,
                                 const std::optional<HermitianMetricField>& chi_prime = std::nullopt);

}  // namespace dlab
