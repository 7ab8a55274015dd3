#include "dlab/donaldson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dlab/calculus.hpp"
#include "dlab/error.hpp"
#include "dlab/geometry.hpp"
#include "dlab/krylov.hpp"
#include "dlab/spectral.hpp"
#include "dlab/trace_operator.hpp"

namespace dlab {

void SolverOptions::validate() const {
  if (!(residual_tolerance > 0.0)) throw std::invalid_argument("residual_tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (!(linear_tolerance > 0.0)) throw std::invalid_argument("linear_tolerance must be positive");
  if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("damping must lie in (0, 1]");
  if (krylov_restart < 1 || krylov_max_iterations < 1) throw std::invalid_argument("Krylov budget must be positive");
}

namespace {

TraceOperator::State checked_state(const TraceOperator& op, const ScalarField& phi, bool with_h) {
  auto s = op.evaluate(phi, with_h);
  if (!s.positive)
    throw PositivityLost("chi_phi is not positive definite (min eigenvalue " + std::to_string(s.min_eigenvalue) +
                         " at point " + std::to_string(s.argmin) + ")");
  return s;
}

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / v.size());
}

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

ScalarField trace_residual(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& phi,
                           const ScalarField& F) {
  require_same_grid(g.grid(), F.grid());
  TraceOperator op(g, chi);
  auto s = checked_state(op, phi, false);
  int n = g.n();
  ScalarField r(g.grid());
  for (std::size_t p = 0; p < r.size(); ++p) r[p] = s.trace[p] - n * std::exp(F[p]);
  return r;
}

ScalarField manufacture_F(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& phi_star) {
  TraceOperator op(g, chi);
  auto s = checked_state(op, phi_star, false);
  ScalarField F(g.grid());
  for (std::size_t p = 0; p < F.size(); ++p) F[p] = std::log(s.trace[p] / g.n());
  return F;
}

SolveResult newton_solve(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& F,
                         const SolverOptions& opts, const std::optional<ScalarField>& initial) {
  opts.validate();
  require_same_grid(g.grid(), F.grid());
  TraceOperator op(g, chi);
  const auto& grid = g.grid();
  std::size_t P = grid.size();
  int n = grid.n();

  std::vector<double> target(P);
  for (std::size_t p = 0; p < P; ++p) target[p] = n * std::exp(F[p]);

  ScalarField phi = initial ? *initial : ScalarField(grid);
  require_same_grid(grid, phi.grid());
  if (opts.mean_zero) phi += -phi.mean();

  auto state = checked_state(op, phi, true);
  std::vector<double> r(P);
  auto residual = [&](const TraceOperator::State& s, std::vector<double>& out) {
    for (std::size_t p = 0; p < P; ++p) out[p] = s.trace[p] - target[p];
  };
  residual(state, r);

  SolveResult out{phi, 0, sup_abs(r), 0, {sup_abs(r)}};
  std::vector<double> rhs(P), delta(P), trial_r(P);
  double eta = opts.adaptive_forcing ? 0.1 : opts.linear_tolerance;
  double prev_merit = rms(r);
  while (out.residual_sup >= opts.residual_tolerance) {
    if (out.iterations >= opts.max_iterations)
      throw NoConvergence("Newton iteration budget exhausted; sup residual " + std::to_string(out.residual_sup));

    // Projected Newton system P Delta_h delta = P r on mean-zero functions.
    rhs = r;
    remove_mean(rhs);
    // Right preconditioning folded into the operator: y -> P Delta_h M^{-1} y.
    const auto& coef = state.h;
    auto pre = op.preconditioner(state.h);
    const auto& sp = op.spectral();
    Spectrum hat;
    LinearMap apply = [&](const std::vector<double>& in, std::vector<double>& o) {
      op.precondition(pre, in.data(), hat);
      op.laplacian(coef, hat, o.data());
      remove_mean(o);
    };
    std::vector<double> y(P, 0.0);
    auto kr = gmres(apply, {}, rhs, y, eta, opts.krylov_restart, opts.krylov_max_iterations);
    out.krylov_iterations += kr.iterations;
    op.precondition(pre, y.data(), hat);
    sp.apply(hat, Symbol{std::vector<double>(hat.size(), 1.0), false}, delta.data());
    remove_mean(delta);

    double step = opts.damping;
    double merit = rms(r);
    bool all_nonpositive = true;
    for (;;) {
      ScalarField trial = phi;
      for (std::size_t p = 0; p < P; ++p) trial[p] += step * delta[p];
      auto ts = op.evaluate(trial, true);
      if (ts.positive) {
        all_nonpositive = false;
        residual(ts, trial_r);
        if (rms(trial_r) < merit) {
          phi = std::move(trial);
          state = std::move(ts);
          r.swap(trial_r);
          break;
        }
      }
      step *= 0.5;
      if (step < std::ldexp(1.0, -20)) {
        if (all_nonpositive) throw PositivityLost("no damped Newton step keeps chi_phi positive definite");
        throw NoConvergence("damping floor reached without residual decrease; sup residual " +
                            std::to_string(out.residual_sup));
      }
    }
    ++out.iterations;
    out.residual_sup = sup_abs(r);
    if (opts.adaptive_forcing) {
      // Eisenstat-Walker choice 2 with safeguards; never finer than needed to reach the tolerance.
      double m = rms(r);
      double next = 0.9 * (m / prev_merit) * (m / prev_merit);
      if (0.9 * eta * eta > 0.1) next = std::max(next, 0.9 * eta * eta);
      next = std::max(next, 0.5 * opts.residual_tolerance / std::max(out.residual_sup, 1e-300));
      eta = std::clamp(next, opts.linear_tolerance, 0.1);
      prev_merit = m;
    }
    out.residual_history.push_back(out.residual_sup);
  }
  if (opts.mean_zero) phi += -phi.mean();
  out.phi = std::move(phi);
  return out;
}

double jflow_constant(const HermitianMetricField& g, const HermitianMetricField& chi) {
  require_same_grid(g.grid(), chi.grid());
  chi.require_positive("chi");
  double num = 0.0, den = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    double d = herm::det(chi[p]);
    num += herm::trace_product(herm::inverse(chi[p]), g[p]) / g.n() * d;
    den += d;
  }
  return num / den;
}

namespace {

Condition from_margin(double m) { return {m > 0.0, m, false}; }

Condition vacuous() { return {true, std::numeric_limits<double>::infinity(), true}; }

}  // namespace

StabilityReport stability_report(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& F,
                                 const std::optional<HermitianMetricField>& chi_prime) {
  require_same_grid(g.grid(), chi.grid());
  require_same_grid(g.grid(), F.grid());
  int n = g.n();
  if (n > 2) throw UnsupportedDimension("cone conditions are implemented for n <= 2");
  const HermitianMetricField& cp = chi_prime ? *chi_prime : chi;
  require_same_grid(g.grid(), cp.grid());
  StabilityReport rep;
  rep.jflow_constant = jflow_constant(g, chi);
  double c = rep.jflow_constant;

  double li = std::numeric_limits<double>::infinity();
  double thm = li, sw = li, sun = li;
  for (std::size_t p = 0; p < g.size(); ++p) {
    double ef = std::exp(F[p]);
    li = std::min(li, herm::min_eigenvalue(chi[p] - (n - 1) / (n * ef) * g[p]));
    thm = std::min(thm, herm::trace_product(herm::inverse(chi[p]), g[p]) / n - ef);
    if (n == 2) {
      sw = std::min(sw, herm::min_eigenvalue(2.0 * c * cp[p] - g[p]));
      sun = std::min(sun, herm::min_eigenvalue(2.0 * cp[p] - g[p] / ef));
    }
  }
  rep.li_condition = from_margin(li);
  rep.thm12_hypothesis = from_margin(thm);
  HMat chi_bar = herm::mean(chi.values());
  HMat g_bar = herm::mean(g.values());
  rep.donaldson_necessary = from_margin(herm::min_eigenvalue(n * c * chi_bar - g_bar));
  if (n == 2) {
    rep.song_weinkove = from_margin(sw);
    rep.sun_cone = from_margin(sun);
  } else {
    rep.song_weinkove = vacuous();
    rep.sun_cone = vacuous();
  }
  return rep;
}

}  // namespace dlab
