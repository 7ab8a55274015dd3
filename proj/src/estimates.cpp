#include "dlab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dlab/calculus.hpp"
#include "dlab/error.hpp"

namespace dlab {

void EstimateParameters::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (!(K >= 0.0)) throw std::invalid_argument("K must be nonnegative");
  if (!(C_explicit >= 0.0)) throw std::invalid_argument("C_explicit must be nonnegative");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("tolerance must be nonnegative");
}

namespace {

constexpr double prereq_tolerance = 1e-8;
constexpr double roundoff = 1e-12;

// Everything the identities need at one snapshot, computed once.
struct Context {
  const HermitianMetricField& g;
  const HermitianMetricField& chi;
  const ScalarField& phi;
  const ScalarField& F;
  const std::optional<FlowData>& flow;
  int n;
  std::size_t P;
  std::vector<HMat> ginv;
  std::vector<HMat> h;         // contravariant: h^{i jbar} = h[p](j,i)
  std::vector<double> trace;   // tr_{chi_phi} omega
  std::vector<double> E;       // e^F, or e^{F - dphi/dt} along a flow
  ComplexCovectorField dphi;
  ComplexHessianField hess;
  std::vector<double> norm2;   // |grad phi|^2_omega

  Context(const HermitianMetricField& g_, const HermitianMetricField& chi_, const ScalarField& phi_,
          const ScalarField& F_, const std::optional<FlowData>& flow_, bool holomorphic)
      : g(g_), chi(chi_), phi(phi_), F(F_), flow(flow_), n(g_.n()), P(g_.size()),
        dphi(complex_gradient(phi_)), hess(complex_hessian(phi_, holomorphic)) {
    require_same_grid(g.grid(), chi.grid());
    require_same_grid(g.grid(), phi.grid());
    require_same_grid(g.grid(), F.grid());
    if (flow) require_same_grid(g.grid(), flow->dphi_dt.grid());
    if (g.variance() != Variance::covariant || chi.variance() != Variance::covariant)
      throw std::invalid_argument("omega and chi must be covariant metrics");
    g.require_positive("omega");
    ginv.resize(P), h.resize(P), trace.resize(P), E.resize(P), norm2.resize(P);
    double worst = 0.0;
    std::size_t where = 0;
    for (std::size_t p = 0; p < P; ++p) {
      HMat c = chi[p] + hess.mixed[p];
      double m = herm::min_eigenvalue(c);
      if (!(m > positivity_floor))
        throw PositivityLost("chi_phi not positive definite at point " + std::to_string(p));
      HMat x = herm::inverse(c);
      ginv[p] = herm::inverse(g[p]);
      h[p] = x * g[p] * x;
      trace[p] = herm::trace_product(x, g[p]);
      E[p] = std::exp(flow ? F[p] - flow->dphi_dt[p] : F[p]);
      norm2[p] = herm::quad(ginv[p], dphi.v[p]);
      double r = std::abs(trace[p] - n * E[p]);
      if (r > worst) worst = r, where = p;
    }
    if (worst >= prereq_tolerance)
      throw PrereqViolated("trace identity residual " + std::to_string(worst) + " at point " + std::to_string(where) +
                           (flow ? " (flow form)" : ""));
  }

  // tr_h dd-bar f
  std::vector<double> laplacian_h(const ScalarField& f) const {
    auto hf = complex_hessian(f, false);
    std::vector<double> out(P);
    for (std::size_t p = 0; p < P; ++p) out[p] = (h[p] * hf.mixed[p]).trace().real();
    return out;
  }

  ScalarField norm2_field() const { return ScalarField(g.grid(), norm2); }

  // Re(g^{k lbar} u_k phi_lbar), u = gradient of dphi/dt
  std::vector<double> time_pairing() const {
    std::vector<double> out(P, 0.0);
    if (!flow) return out;
    auto u = complex_gradient(flow->dphi_dt);
    for (std::size_t p = 0; p < P; ++p) out[p] = herm::form(ginv[p], dphi.v[p], u.v[p]).real();
    return out;
  }
};

// Gamma_k = d_k G . G^{-1}, so Gamma_k(i,p) = Gamma^p_{k i}.
std::vector<HMat> christoffel(const HermitianMetricField& g, const std::vector<HMat>& ginv) {
  if (g.is_constant()) return {};
  auto dg = holomorphic_derivative(g);
  int n = g.n();
  std::vector<HMat> gamma(g.size() * n);
  for (std::size_t p = 0; p < g.size(); ++p)
    for (int k = 0; k < n; ++k) gamma[p * n + k] = dg.at(p, k) * ginv[p];
  return gamma;
}

// (nabla_k chi)(i,j) = chi_{i jbar, k}; empty when chi is parallel.
std::vector<HMat> covariant_chi(const HermitianMetricField& chi, const std::vector<HMat>& gamma) {
  int n = chi.n();
  std::size_t P = chi.size();
  if (chi.is_constant() && gamma.empty()) return {};
  std::vector<HMat> out(P * n, HMat::Zero(n, n));
  if (!chi.is_constant()) {
    auto dc = holomorphic_derivative(chi);
    for (std::size_t p = 0; p < P; ++p)
      for (int k = 0; k < n; ++k) out[p * n + k] = dc.at(p, k);
  }
  if (!gamma.empty())
    for (std::size_t p = 0; p < P; ++p)
      for (int k = 0; k < n; ++k) out[p * n + k] -= gamma[p * n + k] * chi[p];
  return out;
}

double chi_gradient_norm(const std::vector<HMat>& dchi, const HMat& ginv, std::size_t p, int n) {
  if (dchi.empty()) return 0.0;
  // sum_{k,k'} g^{k k'bar} tr(A_k G^{-1} A_k'^H G^{-1})
  double s = 0.0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      const HMat& a = dchi[p * n + k];
      const HMat& b = dchi[p * n + l];
      s += (ginv(l, k) * (a * ginv * b.adjoint() * ginv).trace()).real();
    }
  return std::sqrt(std::max(s, 0.0));
}

double explicit_C(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& F,
                  const ScalarField* dphi_dt) {
  require_same_grid(g.grid(), chi.grid());
  require_same_grid(g.grid(), F.grid());
  int n = g.n();
  std::vector<HMat> ginv(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) ginv[p] = herm::inverse(g[p]);
  auto dchi = covariant_chi(chi, christoffel(g, ginv));
  auto dF = complex_gradient(F);
  double c = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    double e = std::exp(dphi_dt ? F[p] - (*dphi_dt)[p] : F[p]);
    double gf = std::sqrt(std::max(herm::quad(ginv[p], dF.v[p]), 0.0));
    double v = 2.0 * n * e * gf + 2.0 * n * n * e * e * chi_gradient_norm(dchi, ginv[p], p, n);
    if (dphi_dt) v /= 1.0 + e;
    c = std::max(c, v);
  }
  return c;
}

IdentityCheck prop21(const Context& cx, const CurvatureField& R, double coefficient) {
  require_same_grid(cx.g.grid(), R.grid());
  int n = cx.n;
  std::size_t P = cx.P;
  auto gamma = christoffel(cx.g, cx.ginv);
  auto dchi = covariant_chi(cx.chi, gamma);
  auto dF = complex_gradient(cx.F);
  auto lhs = cx.laplacian_h(cx.norm2_field());
  auto tp = cx.time_pairing();
  IdentityCheck out{ScalarField(cx.g.grid()), 0.0, 0.0};
  for (std::size_t p = 0; p < P; ++p) {
    const HMat& gi = cx.ginv[p];
    const HMat& mh = cx.h[p];
    const CVec& v = cx.dphi.v[p];
    const HMat& phi_mixed = cx.hess.mixed[p];
    double left = lhs[p];
    if (cx.flow) left -= cx.trace[p] * 2.0 * tp[p];

    double ne = n * cx.E[p];
    double rhs = -2.0 * ne * herm::form(gi, v, dF.v[p]).real();
    if (!dchi.empty()) {
      CVec s(n);
      for (int k = 0; k < n; ++k) s(k) = (mh * dchi[p * n + k]).trace();
      rhs -= 2.0 * herm::form(gi, v, s).real();
    }
    if (!R.is_flat()) {
      CVec b = gi * v;
      cd c = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) c += mh(j, i) * R.at(p, i, j, k, l) * std::conj(b(k)) * b(l);
      rhs += coefficient * c.real();
    }
    // phi_{ki} with Christoffel correction
    HMat S = cx.hess.holomorphic[p];
    if (!gamma.empty())
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int q = 0; q < n; ++q) S(k, i) -= gamma[p * n + k](i, q) * v(q);
    cd sq = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            sq += mh(j, i) * gi(l, k) * (S(k, i) * std::conj(S(j, l)) + phi_mixed(k, j) * phi_mixed(i, l));
    rhs += sq.real();

    out.residual[p] = left - rhs;
    out.lhs_sup = std::max(out.lhs_sup, std::abs(left));
  }
  out.sup_residual = out.residual.sup_abs();
  return out;
}

InequalityCheck lemma21(const Context& cx, const EstimateParameters& params) {
  params.validate();
  std::size_t P = cx.P;
  double inf = cx.flow ? cx.flow->inf_reference : cx.phi.min();
  if (inf > cx.phi.min() + 1e-12) throw BadReference("inf_reference exceeds the minimum of phi");
  ScalarField G(cx.g.grid());
  std::vector<double> weight(P);
  for (std::size_t p = 0; p < P; ++p) {
    weight[p] = std::exp(-params.lambda * (cx.phi[p] - inf));
    G[p] = weight[p] * cx.norm2[p];
  }
  auto lhs = cx.laplacian_h(G);
  auto tp = cx.time_pairing();
  InequalityCheck out{ScalarField(cx.g.grid()), std::numeric_limits<double>::infinity(), 0, 0.0};
  for (std::size_t p = 0; p < P; ++p) {
    double left = lhs[p];
    if (cx.flow) {
      double dH = weight[p] * (-params.lambda * cx.flow->dphi_dt[p] * cx.norm2[p] + 2.0 * tp[p]);
      left -= cx.trace[p] * dH;
    }
    double e = cx.E[p];
    double c = cx.flow ? (1.0 + e) * params.C_explicit : params.C_explicit;
    double coef = params.lambda * herm::trace_product(cx.h[p], cx.chi[p]) -
                  2.0 * params.K * herm::trace_product(cx.h[p], cx.g[p]);
    double rhs = -c * std::sqrt(G[p]) + coef * G[p] - 3.0 * params.lambda * cx.n * e * G[p];
    out.margin[p] = left - rhs;
    out.lhs_sup = std::max(out.lhs_sup, std::abs(left));
    if (out.margin[p] < out.min_margin) out.min_margin = out.margin[p], out.argmin = p;
  }
  return out;
}

BoundsCheck bounds(const Context& cx) {
  int n = cx.n;
  BoundsCheck out{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  // Differences within the roundoff allowance of the compared values count as equality.
  auto snap = [](double a, double b) {
    double d = a - b;
    return std::abs(d) <= roundoff * std::max(std::abs(a), std::abs(b)) ? 0.0 : d;
  };
  for (std::size_t p = 0; p < cx.P; ++p) {
    HMat c = cx.chi[p] + cx.hess.mixed[p];
    double tr = herm::trace_product(cx.ginv[p], c);
    double ratio = herm::det(c) / herm::det(cx.g[p]);
    out.det_h_margin = std::min(out.det_h_margin, snap(std::pow(tr, 2 * n) / std::pow(n, n), ratio * ratio));
    double top = herm::generalized_eigenvalues(cx.h[p], cx.ginv[p])(n - 1);
    double ne = n * cx.E[p];
    out.eig_h_margin = std::min(out.eig_h_margin, snap(ne * ne, top));
    out.laplacian_sup = std::max(out.laplacian_sup, herm::trace_product(cx.ginv[p], cx.hess.mixed[p]));
  }
  return out;
}

}  // namespace

ScalarField monitor_G(const HermitianMetricField& g, const ScalarField& phi, double lambda, double inf_reference) {
  require_same_grid(g.grid(), phi.grid());
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (inf_reference > phi.min() + 1e-12) throw BadReference("inf_reference exceeds the minimum of phi");
  auto grad = complex_gradient(phi);
  ScalarField G(phi.grid());
  for (std::size_t p = 0; p < G.size(); ++p)
    G[p] = std::exp(-lambda * (phi[p] - inf_reference)) * herm::quad(herm::inverse(g[p]), grad.v[p]);
  return G;
}

LambdaChoice choose_lambda(const HermitianMetricField& g, const HermitianMetricField& chi, double K) {
  require_same_grid(g.grid(), chi.grid());
  if (!(K >= 0.0)) throw std::invalid_argument("K must be nonnegative");
  LambdaChoice out;
  for (std::size_t p = 0; p < g.size(); ++p) {
    auto ev = herm::generalized_eigenvalues(g[p], chi[p]);
    out.Lambda = std::max(out.Lambda, ev(ev.size() - 1));
  }
  out.lambda = std::max(1.0, (2.0 * K + 1.0) * out.Lambda);
  out.margin = out.coefficient_min = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < g.size(); ++p) {
    HMat a = out.lambda * chi[p] - 2.0 * K * g[p];
    out.coefficient_min = std::min(out.coefficient_min, herm::min_eigenvalue(a));
    out.margin = std::min(out.margin, herm::min_eigenvalue(a - g[p]));
  }
  return out;
}

double explicit_constant_C(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& F,
                           const std::optional<ScalarField>& dphi_dt) {
  if (dphi_dt) require_same_grid(g.grid(), dphi_dt->grid());
  return explicit_C(g, chi, F, dphi_dt ? &*dphi_dt : nullptr);
}

IdentityCheck prop21_check(const HermitianMetricField& g, const CurvatureField& R, const HermitianMetricField& chi,
                           const ScalarField& phi, const ScalarField& F, const std::optional<FlowData>& flow,
                           double curvature_coefficient) {
  Context cx(g, chi, phi, F, flow, true);
  return prop21(cx, R, curvature_coefficient);
}

InequalityCheck lemma21_check(const HermitianMetricField& g, const CurvatureField& R, const HermitianMetricField& chi,
                              const ScalarField& phi, const ScalarField& F, const EstimateParameters& params,
                              const std::optional<FlowData>& flow) {
  require_same_grid(g.grid(), R.grid());
  Context cx(g, chi, phi, F, flow, false);
  return lemma21(cx, params);
}

BoundsCheck bounds_check(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& phi,
                         const ScalarField& F, const std::optional<FlowData>& flow) {
  Context cx(g, chi, phi, F, flow, false);
  return bounds(cx);
}

IntegralIdentity integral_identity_check(const HermitianMetricField& g, const ScalarField& phi, double lambda) {
  require_same_grid(g.grid(), phi.grid());
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  auto grad = complex_gradient(phi);
  auto hess = complex_hessian(phi, false);
  double inf = phi.min();
  IntegralIdentity out;
  for (std::size_t p = 0; p < phi.size(); ++p) {
    HMat gi = herm::inverse(g[p]);
    double w = std::exp(-lambda * (phi[p] - inf)) * herm::det(g[p]);
    out.lhs += w * herm::quad(gi, grad.v[p]);
    out.rhs += w * herm::trace_product(gi, hess.mixed[p]);
  }
  double cell = phi.grid().cell_volume();
  out.lhs *= cell;
  out.rhs *= cell / lambda;
  out.gap = std::abs(out.lhs - out.rhs) / (1.0 + std::abs(out.lhs));
  return out;
}

EstimateParameters default_parameters(const HermitianMetricField& g, const HermitianMetricField& chi,
                                      const ScalarField& F, const std::optional<ScalarField>& dphi_dt,
                                      std::uint64_t seed, int sample_count) {
  EstimateParameters params;
  params.K = bisectional_lower_bound(curvature_tensor(g), g, sample_count, seed).K;
  params.lambda = choose_lambda(g, chi, params.K).lambda;
  params.C_explicit = explicit_constant_C(g, chi, F, dphi_dt);
  return params;
}

EstimateReport gradient_estimate_report(const HermitianMetricField& g, const HermitianMetricField& chi,
                                        const ScalarField& phi, const ScalarField& F, const EstimateParameters& params,
                                        const std::optional<FlowData>& flow) {
  params.validate();
  EstimateReport r;
  r.lambda = params.lambda, r.K = params.K, r.C_explicit = params.C_explicit;
  Context cx(g, chi, phi, F, flow, true);
  auto R = curvature_tensor(g);

  double inf = flow ? flow->inf_reference : phi.min();
  std::vector<double> G(cx.P);
  for (std::size_t p = 0; p < cx.P; ++p) {
    G[p] = std::exp(-params.lambda * (phi[p] - inf)) * cx.norm2[p];
    if (G[p] > r.sup_G) r.sup_G = G[p], r.argmax_G = p;
  }
  r.C_thm11 = r.sup_G;
  r.C_first_power = std::sqrt(r.sup_G);
  if (flow) r.sup_H = r.sup_G;

  auto id = prop21(cx, R, 1.0);
  r.prop21_residual = id.lhs_sup > 0.0 ? id.relative() : id.sup_residual;
  auto lem = lemma21(cx, params);
  r.lemma21_margin = lem.min_margin;
  r.lemma21_slack = lem.slack(params.tolerance);
  auto b = bounds(cx);
  r.det_h_margin = b.det_h_margin, r.eig_h_margin = b.eig_h_margin, r.laplacian_sup = b.laplacian_sup;
  r.integral_identity_gap = params.lambda > 0.0 ? integral_identity_check(g, phi, params.lambda).gap : 0.0;
  r.cone = stability_report(g, chi, F);
  if (flow) r.dpdt_sup = flow->dphi_dt.sup_abs();
  return r;
}

TrajectoryEstimates trajectory_estimates(const HermitianMetricField& g, const HermitianMetricField& chi,
                                         const ScalarField& F, const std::vector<Snapshot>& snapshots,
                                         const EstimateParameters& params) {
  TrajectoryEstimates out;
  out.inf_phi = std::numeric_limits<double>::infinity();
  for (const auto& s : snapshots) out.inf_phi = std::min(out.inf_phi, s.phi.min());
  for (const auto& s : snapshots) {
    auto r = gradient_estimate_report(g, chi, s.phi, F, params, FlowData{s.dphi_dt, out.inf_phi});
    if (r.sup_H >= out.sup_H) {
      out.sup_H = r.sup_H;
      out.argmax_point = r.argmax_G;
      out.argmax_time = s.t;
    }
    out.reports.push_back(std::move(r));
  }
  out.C_first_power = std::sqrt(out.sup_H);
  return out;
}

}  // namespace dlab
