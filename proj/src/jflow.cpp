#include "dlab/jflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dlab/error.hpp"
#include "dlab/krylov.hpp"
#include "dlab/trace_operator.hpp"

namespace dlab {

void FlowOptions::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (max_halvings < 0) throw std::invalid_argument("max_halvings must be non-negative");
  if (!(newton_tolerance > 0.0)) throw std::invalid_argument("newton_tolerance must be positive");
  if (newton_max_iterations < 1) throw std::invalid_argument("newton_max_iterations must be positive");
  if (!(monitor_tolerance >= 0.0)) throw std::invalid_argument("monitor_tolerance must be nonnegative");
  if (bisectional_samples < 1) throw std::invalid_argument("bisectional_samples must be positive");
  if (!(estimate_tolerance > 0.0)) throw std::invalid_argument("estimate_tolerance must be positive");
}

std::vector<Snapshot> Trajectory::snapshots() const {
  std::vector<Snapshot> out;
  for (std::size_t k = 0; k < states.size(); ++k) out.push_back({states[k].t, states[k].phi, dphi_dt[k]});
  return out;
}

namespace {

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / v.size());
}

// Largest |symbol| of tr dd-bar on the grid: every axis at the Nyquist wavenumber.
double max_symbol(const TorusGrid& grid) {
  double k = std::numbers::pi * grid.N() / grid.period();
  return 0.5 * grid.n() * k * k;
}

double largest_eigenvalue(const TraceOperator::Coefficients& h, std::size_t p, int n) {
  if (n == 1) return h.a00[p];
  double mid = 0.5 * (h.a00[p] + h.a11[p]), half = 0.5 * (h.a00[p] - h.a11[p]);
  return mid + std::sqrt(half * half + h.re10[p] * h.re10[p] + h.im10[p] * h.im10[p]);
}

// The flow rhs at phi; false when chi_phi is not positive.
bool evaluate_rhs(const TraceOperator& op, const ScalarField& F, const ScalarField& phi, bool with_h,
                  TraceOperator::State& s, std::vector<double>& rhs) {
  s = op.evaluate(phi, with_h);
  if (!s.positive) return false;
  int n = op.n();
  rhs.resize(phi.size());
  for (std::size_t p = 0; p < rhs.size(); ++p) rhs[p] = F[p] - std::log(s.trace[p] / n);
  return true;
}

FlowState make_state(double t, ScalarField phi, double dt, const TraceOperator::State& s,
                     const std::vector<double>& rhs) {
  return {t, std::move(phi), dt, sup_abs(rhs), s.min_eigenvalue};
}

double stiffness_of(const TraceOperator& op, const TraceOperator::State& s) {
  double top = 0.0;
  for (std::size_t p = 0; p < s.trace.size(); ++p)
    top = std::max(top, largest_eigenvalue(s.h, p, op.n()) / s.trace[p]);
  return top * max_symbol(op.grid());
}

std::optional<ScalarField> rk4_attempt(const TraceOperator& op, const ScalarField& F, const ScalarField& phi,
                                       const std::vector<double>& k1, double dt) {
  std::size_t P = phi.size();
  TraceOperator::State s;
  std::vector<double> k2, k3, k4;
  ScalarField stage(phi.grid());
  auto advance = [&](const std::vector<double>& k, double h) {
    for (std::size_t p = 0; p < P; ++p) stage[p] = phi[p] + h * k[p];
  };
  advance(k1, 0.5 * dt);
  if (!evaluate_rhs(op, F, stage, false, s, k2)) return std::nullopt;
  advance(k2, 0.5 * dt);
  if (!evaluate_rhs(op, F, stage, false, s, k3)) return std::nullopt;
  advance(k3, dt);
  if (!evaluate_rhs(op, F, stage, false, s, k4)) return std::nullopt;
  for (std::size_t p = 0; p < P; ++p) stage[p] = phi[p] + dt / 6.0 * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
  return stage;
}

// Solves phi - phi_old - dt rhs(phi) = 0 by Newton-Krylov; J = I - dt Delta_{h/T}.
std::optional<ScalarField> implicit_attempt(const TraceOperator& op, const ScalarField& F, const ScalarField& phi_old,
                                            const std::vector<double>& rhs_old, double dt, const FlowOptions& opts) {
  const auto& grid = op.grid();
  const auto& sp = op.spectral();
  std::size_t P = grid.size();
  int n = op.n();

  TraceOperator::State s;
  std::vector<double> rhs;
  ScalarField phi = phi_old;
  for (std::size_t p = 0; p < P; ++p) phi[p] += dt * rhs_old[p];
  if (!evaluate_rhs(op, F, phi, true, s, rhs)) {
    phi = phi_old;
    if (!evaluate_rhs(op, F, phi, true, s, rhs)) return std::nullopt;
  }
  std::vector<double> G(P);
  auto residual = [&](const ScalarField& x, const std::vector<double>& r, std::vector<double>& out) {
    for (std::size_t p = 0; p < P; ++p) out[p] = x[p] - phi_old[p] - dt * r[p];
  };
  residual(phi, rhs, G);

  std::vector<double> ones(sp.spectrum_size(), 1.0), mult(sp.spectrum_size());
  std::vector<double> b(P), y(P), delta(P), trialG(P), trial_rhs;
  double eta = 1e-2, prev = rms(G);
  for (int it = 0; sup_abs(G) >= opts.newton_tolerance; ++it) {
    if (it >= opts.newton_max_iterations) return std::nullopt;
    // k = h / T, factored as a(x) (k / a) with a = tr(k) / n
    TraceOperator::Coefficients k = s.h;
    std::vector<double> inv_a(P);
    HMat kbar = HMat::Zero(n, n);
    double mean_inv_a = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      double inv_t = 1.0 / s.trace[p];
      k.a00[p] *= inv_t;
      if (n == 2) k.a11[p] *= inv_t, k.re10[p] *= inv_t, k.im10[p] *= inv_t;
      double a = n == 1 ? k.a00[p] : 0.5 * (k.a00[p] + k.a11[p]);
      inv_a[p] = 1.0 / a;
      mean_inv_a += inv_a[p];
      kbar += k.at(p, n) * inv_a[p];
    }
    mean_inv_a /= P;
    kbar = herm::symmetrize(kbar / static_cast<double>(P));
    auto sigma = sp.laplacian_symbol(kbar);
    for (std::size_t m = 0; m < mult.size(); ++m) mult[m] = 1.0 / (mean_inv_a - dt * sigma[m]);

    Spectrum hat;
    std::vector<double> w(P), z(P), lap(P);
    auto precondition = [&](const std::vector<double>& in, std::vector<double>& out_z) {
      for (std::size_t p = 0; p < P; ++p) w[p] = in[p] * inv_a[p];
      hat = sp.forward(w.data());
      for (std::size_t m = 0; m < hat.size(); ++m) hat[m] *= mult[m];
      sp.apply_multiplier(hat, ones, out_z.data());
    };
    LinearMap apply = [&](const std::vector<double>& in, std::vector<double>& out) {
      precondition(in, z);
      op.laplacian(k, hat, lap.data());
      for (std::size_t p = 0; p < P; ++p) out[p] = z[p] - dt * lap[p];
    };
    for (std::size_t p = 0; p < P; ++p) b[p] = -G[p];
    std::fill(y.begin(), y.end(), 0.0);
    gmres(apply, {}, b, y, eta, 20, 400);
    precondition(y, delta);

    double step = 1.0, merit = rms(G);
    for (;;) {
      ScalarField trial = phi;
      for (std::size_t p = 0; p < P; ++p) trial[p] += step * delta[p];
      TraceOperator::State ts;
      if (evaluate_rhs(op, F, trial, true, ts, trial_rhs)) {
        residual(trial, trial_rhs, trialG);
        if (rms(trialG) < merit) {
          phi = std::move(trial);
          s = std::move(ts);
          rhs.swap(trial_rhs);
          G.swap(trialG);
          break;
        }
      }
      step *= 0.5;
      if (step < std::ldexp(1.0, -20)) return std::nullopt;
    }
    double m = rms(G);
    eta = std::clamp(0.9 * (m / prev) * (m / prev), 1e-12, 1e-2);
    eta = std::max(eta, 0.5 * opts.newton_tolerance / std::max(sup_abs(G), 1e-300));
    eta = std::min(eta, 1e-2);
    prev = m;
  }
  return phi;
}

FlowState step_with(const TraceOperator& op, const ScalarField& F, const FlowState& state, double dt_target,
                    const FlowOptions& opts) {
  opts.validate();
  if (!(dt_target >= 0.0)) throw std::invalid_argument("dt_target must be nonnegative");
  if (dt_target == 0.0) return state;
  TraceOperator::State s;
  std::vector<double> rhs;
  if (!evaluate_rhs(op, F, state.phi, opts.integrator == Integrator::rk4, s, rhs))
    throw PositivityLost("flow state is not in the admissible cone");
  double dt = dt_target;
  if (opts.integrator == Integrator::rk4) dt = std::min(dt, opts.kappa / stiffness_of(op, s));
  for (int halvings = 0; halvings <= opts.max_halvings; ++halvings, dt *= 0.5) {
    auto next = opts.integrator == Integrator::rk4 ? rk4_attempt(op, F, state.phi, rhs, dt)
                                                   : implicit_attempt(op, F, state.phi, rhs, dt, opts);
    if (!next) continue;
    TraceOperator::State ns;
    std::vector<double> nrhs;
    if (!evaluate_rhs(op, F, *next, false, ns, nrhs)) continue;
    return make_state(state.t + dt, std::move(*next), dt, ns, nrhs);
  }
  throw StepFailure("no admissible step after " + std::to_string(opts.max_halvings) + " halvings at t = " +
                    std::to_string(state.t));
}

}  // namespace

ScalarField flow_rhs(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& phi,
                     const ScalarField& F) {
  require_same_grid(g.grid(), F.grid());
  TraceOperator op(g, chi);
  TraceOperator::State s;
  std::vector<double> rhs;
  if (!evaluate_rhs(op, F, phi, false, s, rhs))
    throw PositivityLost("chi_phi not positive definite at point " + std::to_string(s.argmin));
  return ScalarField(phi.grid(), std::move(rhs));
}

ScalarField classic_jflow_rhs(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& phi,
                              double c) {
  TraceOperator op(g, chi);
  auto s = op.evaluate(phi, false);
  if (!s.positive) throw PositivityLost("chi_phi not positive definite at point " + std::to_string(s.argmin));
  ScalarField out(phi.grid());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = c - s.trace[p] / g.n();
  return out;
}

double stiffness(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& phi) {
  TraceOperator op(g, chi);
  auto s = op.evaluate(phi, true);
  if (!s.positive) throw PositivityLost("chi_phi not positive definite at point " + std::to_string(s.argmin));
  return stiffness_of(op, s);
}

FlowState initial_state(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& F,
                        const ScalarField& phi0) {
  require_same_grid(g.grid(), F.grid());
  TraceOperator op(g, chi);
  TraceOperator::State s;
  std::vector<double> rhs;
  if (!evaluate_rhs(op, F, phi0, false, s, rhs)) throw PositivityLost("initial potential is not admissible");
  return make_state(0.0, phi0, 0.0, s, rhs);
}

FlowState flow_step(const FlowState& state, const HermitianMetricField& g, const HermitianMetricField& chi,
                    const ScalarField& F, double dt_target, const FlowOptions& opts) {
  require_same_grid(g.grid(), F.grid());
  require_same_grid(g.grid(), state.phi.grid());
  TraceOperator op(g, chi);
  return step_with(op, F, state, dt_target, opts);
}

Trajectory run_flow(const HermitianMetricField& g, const HermitianMetricField& chi, const ScalarField& F,
                    const ScalarField& phi0, double T, double monitor_interval, const FlowOptions& opts) {
  opts.validate();
  require_same_grid(g.grid(), F.grid());
  require_same_grid(g.grid(), phi0.grid());
  if (!(T >= 0.0)) throw std::invalid_argument("T must be nonnegative");
  if (T > 0.0 && !(monitor_interval > 0.0)) throw std::invalid_argument("monitor_interval must be positive");
  TraceOperator op(g, chi);
  Trajectory tr;
  tr.T = T;

  TraceOperator::State s;
  std::vector<double> rhs;
  if (!evaluate_rhs(op, F, phi0, false, s, rhs)) throw PositivityLost("initial potential is not admissible");
  FlowState state = make_state(0.0, phi0, 0.0, s, rhs);
  double bound = state.rhs_sup * (1.0 + opts.monitor_tolerance);
  auto record = [&](const FlowState& st, std::vector<double> r) {
    MonitorRecord m{st.t, st.rhs_sup, st.rhs_sup > bound};
    tr.monitor_violation = tr.monitor_violation || m.violated;
    tr.monitor.push_back(m);
    tr.states.push_back(st);
    tr.dphi_dt.emplace_back(st.phi.grid(), std::move(r));
  };
  record(state, rhs);

  double eps = 1e-12 * std::max(1.0, T);
  for (int m = 1; state.t < T - eps; ++m) {
    double next = std::min(T, m * monitor_interval);
    while (state.t < next - eps) {
      double dt = std::min(opts.dt, next - state.t);
      state = step_with(op, F, state, dt, opts);
      ++tr.steps;
    }
    state.t = next;
    if (!evaluate_rhs(op, F, state.phi, false, s, rhs)) throw PositivityLost("flow left the admissible cone");
    record(state, rhs);
  }

  if (opts.attach_estimates) {
    EstimateParameters params = default_parameters(g, chi, F, tr.dphi_dt.front(), opts.seed, opts.bisectional_samples);
    params.tolerance = opts.estimate_tolerance;
    for (const auto& r : tr.dphi_dt) params.C_explicit = std::max(params.C_explicit, explicit_constant_C(g, chi, F, r));
    tr.parameters = params;
    tr.estimates = trajectory_estimates(g, chi, F, tr.snapshots(), params);
  }
  return tr;
}

}  // namespace dlab
