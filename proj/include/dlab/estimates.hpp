#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dlab/donaldson.hpp"
#include "dlab/geometry.hpp"
#include "dlab/grid.hpp"
#include "dlab/hermitian.hpp"

namespace dlab {

struct EstimateParameters {
  double lambda = 1.0;
  double K = 0.0;
  double C_explicit = 0.0;
  double tolerance = 1e-6;

  void validate() const;
};

// Inputs that only exist along a flow: dphi_dt is the flow right-hand side
// at the snapshot, inf_reference the minimum of phi over all snapshots.
struct FlowData {
  ScalarField dphi_dt;
  double inf_reference = 0.0;
};

struct LambdaChoice {
  double lambda = 1.0;
  double Lambda = 0.0;  // sup of the largest eigenvalue of omega relative to chi
  // min over the grid of the smallest eigenvalue of lambda chi - 2K omega - omega
  double margin = 0.0;
  // min over the grid of the smallest eigenvalue of lambda chi - 2K omega
  double coefficient_min = 0.0;
};

struct IdentityCheck {
  ScalarField residual;
  double sup_residual = 0.0;
  double lhs_sup = 0.0;
  double relative() const { return sup_residual / lhs_sup; }
};

struct InequalityCheck {
  ScalarField margin;
  double min_margin = 0.0;
  std::size_t argmin = 0;
  double lhs_sup = 0.0;  // sup |Delta_h G| (or of the heat operator applied to H)
  double slack(double tolerance) const { return tolerance * (1.0 + lhs_sup); }
  bool holds(double tolerance) const { return min_margin >= -slack(tolerance); }
};

struct BoundsCheck {
  double det_h_margin = 0.0;
  double eig_h_margin = 0.0;
  double laplacian_sup = 0.0;
};

struct IntegralIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
};

struct EstimateReport {
  double lambda = 0.0, K = 0.0, C_explicit = 0.0;
  double sup_G = 0.0;
  double sup_H = 0.0;
  double C_thm11 = 0.0;
  double C_first_power = 0.0;  // sup sqrt(G), the first-power normalization
  std::size_t argmax_G = 0;
  double prop21_residual = 0.0;  // relative to sup |Delta_h |grad phi|^2|
  double lemma21_margin = 0.0;
  double lemma21_slack = 0.0;
  double det_h_margin = 0.0, eig_h_margin = 0.0, laplacian_sup = 0.0;
  double integral_identity_gap = 0.0;
  StabilityReport cone;
  double dpdt_sup = 0.0;
};

// e^{-lambda (phi - inf_reference)} |grad phi|^2_omega
ScalarField monitor_G(const HermitianMetricField& g, const ScalarField& phi, double lambda, double inf_reference);

LambdaChoice choose_lambda(const HermitianMetricField& g, const HermitianMetricField& chi, double K);

// sup (2n e^F |grad F| + 2n^2 e^{2F} |grad chi|). Along a flow e^F becomes
// E = e^{F - dphi/dt} and the bound is divided by (1 + E).
double explicit_constant_C(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& F,
                           const std::optional<ScalarField>& dphi_dt = std::nullopt);

IdentityCheck prop21_check(const HermitianMetricField& g, const CurvatureField& R, const HermitianMetricField& chi,
                           const ScalarField& phi, const ScalarField& F,
                           const std::optional<FlowData>& flow = std::nullopt, double curvature_coefficient = 1.0);

InequalityCheck lemma21_check(const HermitianMetricField& g, const CurvatureField& R, const HermitianMetricField& chi,
                              const ScalarField& phi, const ScalarField& F, const EstimateParameters& params,
                              const std::optional<FlowData>& flow = std::nullopt);

BoundsCheck bounds_check(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& phi,
                         const ScalarField& F, const std::optional<FlowData>& flow = std::nullopt);

IntegralIdentity integral_identity_check(const HermitianMetricField& g, const ScalarField& phi, double lambda);

// Parameters with K from sampled bisectional curvature, lambda from
// choose_lambda and C from explicit_constant_C.
EstimateParameters default_parameters(const HermitianMetricField& g, const HermitianMetricField& chi,
                                      const ScalarField& F, const std::optional<ScalarField>& dphi_dt = std::nullopt,
                                      std::uint64_t seed = 0, int sample_count = 64);

EstimateReport gradient_estimate_report(const HermitianMetricField& g, const HermitianMetricField& chi,
                                        const ScalarField& phi, const ScalarField& F, const EstimateParameters& params,
                                        const std::optional<FlowData>& flow = std::nullopt);

struct Snapshot {
  double t = 0.0;
  ScalarField phi;
  ScalarField dphi_dt;
};

struct TrajectoryEstimates {
  std::vector<EstimateReport> reports;
  double inf_phi = 0.0;  // over M x [0, T]
  double sup_H = 0.0;
  double C_first_power = 0.0;
  std::size_t argmax_point = 0;
  double argmax_time = 0.0;
};

TrajectoryEstimates trajectory_estimates(const HermitianMetricField& g, const HermitianMetricField& chi,
                                         const ScalarField& F, const std::vector<Snapshot>& snapshots,
                                         const EstimateParameters& params);

}  // namespace dlab
