#include "dlab/config.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dlab/error.hpp"
#include "dlab/geometry.hpp"

namespace dlab {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

cd read_entry(const json& e) {
  if (e.is_number()) return e.get<double>();
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) return {e[0].get<double>(), e[1].get<double>()};
  throw ConfigError("matrix entries must be numbers or [re, im] pairs");
}

HMat read_matrix(const json& j, int n, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() == "identity") return HMat::Identity(n, n);
    throw ConfigError(where + ".constant must be \"identity\" or a matrix");
  }
  if (!j.is_array() || static_cast<int>(j.size()) != n) throw ConfigError(where + ".constant must have n rows");
  HMat m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != n) throw ConfigError(where + ".constant must be n x n");
    for (int k = 0; k < n; ++k) m(i, k) = read_entry(j[i][k]);
  }
  if (herm::hermitian_defect(m) > 1e-12) throw ConfigError(where + ".constant is not Hermitian");
  if (herm::min_eigenvalue(m) <= positivity_floor) throw ConfigError(where + ".constant is not positive definite");
  return m;
}

json write_matrix(const HMat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(row);
  }
  return rows;
}

MetricSpec read_metric(const json& j, int n, const std::string& where) {
  only_keys(j, {"constant", "amplitude", "frequency", "modes"}, where);
  MetricSpec s;
  if (j.contains("constant")) s.constant = read_matrix(j["constant"], n, where);
  read(j, "amplitude", s.amplitude, where);
  read(j, "frequency", s.frequency, where);
  read(j, "modes", s.modes, where);
  return s;
}

json write_metric(const MetricSpec& s) {
  json j = {{"amplitude", s.amplitude}, {"frequency", s.frequency}, {"modes", s.modes}};
  if (s.constant) j["constant"] = write_matrix(*s.constant);
  return j;
}

HMat random_spd(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0), e(0.9, 1.4);
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) a(i, k) = cd(d(rng), d(rng));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a * a.adjoint());
  Eigen::VectorXd ev(n);
  for (int i = 0; i < n; ++i) ev(i) = e(rng);
  HMat out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  return herm::symmetrize(out);
}

HermitianMetricField build_metric(const ExperimentConfig& c, const TorusGrid& grid, const MetricSpec& s,
                                  std::uint64_t stream) {
  std::mt19937_64 rng(derive_seed(c.seed, stream));
  HMat g0 = s.constant ? *s.constant : random_spd(c.n, rng);
  if (s.amplitude == 0.0) return HermitianMetricField::constant(grid, g0);
  std::mt19937_64 prng(derive_seed(c.seed, stream + 1));
  auto u = TrigPolynomial::random(c.n, prng, s.modes, s.frequency, s.amplitude, c.period);
  return metric_from_potential(grid, g0, u.sample(grid));
}

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::solve: return "solve";
    case Mode::flow: return "flow";
    case Mode::verify: return "verify";
    case Mode::abp: return "abp";
  }
  return "?";
}

int ExperimentConfig::max_frequency() const {
  int k = 0;
  if (omega.amplitude > 0.0) k = std::max(k, omega.frequency);
  if (chi.amplitude > 0.0) k = std::max(k, chi.frequency);
  if (F.kind == FSpec::Kind::manufactured) {
    if (F.amplitude > 0.0) k = std::max(k, F.frequency);
  } else {
    for (const auto& m : F.coefficients)
      for (int a : m.k) k = std::max(k, std::abs(a));
  }
  return k;
}

void ExperimentConfig::validate() const {
  if (n != 1 && n != 2) throw ConfigError("n must be 1 or 2");
  if (N < 8 || (N & (N - 1))) throw ConfigError("N must be a power of two >= 8");
  if (!(period > 0.0)) throw ConfigError("period must be positive");
  if (3 * max_frequency() >= N)
    throw ConfigError("N = " + std::to_string(N) + " does not de-alias frequency " + std::to_string(max_frequency()) +
                      " (need N > 3 k)");
  for (const auto* s : {&omega, &chi}) {
    if (s->amplitude < 0.0 || s->frequency < 1 || s->modes < 1) throw ConfigError("bad metric potential spec");
    if (s->constant && s->constant->rows() != n) throw ConfigError("metric constant has the wrong size");
  }
  if (F.kind == FSpec::Kind::manufactured && (F.amplitude < 0.0 || F.frequency < 1 || F.modes < 1))
    throw ConfigError("bad manufactured F spec");
  for (const auto& m : F.coefficients)
    for (int a = 2 * n; a < 4; ++a)
      if (m.k[a] != 0) throw ConfigError("F mode uses an axis beyond 2n");
  if (!(T >= 0.0)) throw ConfigError("T must be nonnegative");
  if (mode == Mode::flow && T > 0.0 && !(monitor_interval > 0.0)) throw ConfigError("monitor_interval must be positive");
  if (!(estimate_tolerance > 0.0) || !(prop21_tolerance > 0.0) || !(identity_tolerance > 0.0))
    throw ConfigError("tolerances must be positive");
  if (bisectional_samples < 1) throw ConfigError("bisectional_samples must be positive");
  if (abp.M_pts < 8 || abp.quadratic_count < 0 || abp.parabolic_count < 0) throw ConfigError("bad abp spec");
  try {
    flow.validate();
    solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object() || j.empty()) throw ConfigError("config must be a non-empty JSON object");
  only_keys(j, {"n", "N", "seed", "period", "mode", "omega", "chi", "F", "flow", "solver", "estimates", "abp", "output"},
            "config");
  ExperimentConfig c;
  read(j, "n", c.n, "config");
  read(j, "N", c.N, "config");
  read(j, "seed", c.seed, "config");
  read(j, "period", c.period, "config");
  if (c.n != 1 && c.n != 2) throw ConfigError("n must be 1 or 2");
  if (j.contains("mode")) {
    std::string m;
    read(j, "mode", m, "config");
    if (m == "solve") c.mode = Mode::solve;
    else if (m == "flow") c.mode = Mode::flow;
    else if (m == "verify") c.mode = Mode::verify;
    else if (m == "abp") c.mode = Mode::abp;
    else throw ConfigError("unknown mode '" + m + "'");
  }
  if (j.contains("omega")) c.omega = read_metric(j["omega"], c.n, "omega");
  if (j.contains("chi")) c.chi = read_metric(j["chi"], c.n, "chi");
  if (j.contains("F")) {
    const auto& f = j["F"];
    only_keys(f, {"kind", "amplitude", "frequency", "modes", "constant", "coefficients"}, "F");
    std::string kind = "manufactured";
    read(f, "kind", kind, "F");
    if (kind == "manufactured") {
      c.F.kind = FSpec::Kind::manufactured;
      read(f, "amplitude", c.F.amplitude, "F");
      read(f, "frequency", c.F.frequency, "F");
      read(f, "modes", c.F.modes, "F");
    } else if (kind == "explicit") {
      c.F.kind = FSpec::Kind::explicit_coefficients;
      read(f, "constant", c.F.constant, "F");
      if (f.contains("coefficients")) {
        if (!f["coefficients"].is_array()) throw ConfigError("F.coefficients must be an array");
        for (const auto& m : f["coefficients"]) {
          only_keys(m, {"k", "cos", "sin"}, "F.coefficients");
          TrigPolynomial::Mode mode;
          std::vector<int> k;
          read(m, "k", k, "F.coefficients");
          if (k.empty() || k.size() > 4) throw ConfigError("F.coefficients.k must have 1..4 entries");
          std::copy(k.begin(), k.end(), mode.k.begin());
          read(m, "cos", mode.c, "F.coefficients");
          read(m, "sin", mode.s, "F.coefficients");
          c.F.coefficients.push_back(mode);
        }
      }
    } else {
      throw ConfigError("unknown F kind '" + kind + "'");
    }
  }
  if (j.contains("flow")) {
    const auto& f = j["flow"];
    only_keys(f, {"T", "monitor_interval", "integrator", "dt", "kappa", "max_halvings", "newton_tolerance",
                  "monitor_tolerance", "attach_estimates"},
              "flow");
    read(f, "T", c.T, "flow");
    read(f, "monitor_interval", c.monitor_interval, "flow");
    std::string integrator = "implicit_euler";
    read(f, "integrator", integrator, "flow");
    if (integrator == "rk4") c.flow.integrator = Integrator::rk4;
    else if (integrator == "implicit_euler") c.flow.integrator = Integrator::implicit_euler;
    else throw ConfigError("unknown integrator '" + integrator + "'");
    read(f, "dt", c.flow.dt, "flow");
    read(f, "kappa", c.flow.kappa, "flow");
    read(f, "max_halvings", c.flow.max_halvings, "flow");
    read(f, "newton_tolerance", c.flow.newton_tolerance, "flow");
    read(f, "monitor_tolerance", c.flow.monitor_tolerance, "flow");
    read(f, "attach_estimates", c.flow.attach_estimates, "flow");
  } else {
    c.flow.integrator = Integrator::implicit_euler;
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    only_keys(s, {"max_iterations", "residual_tolerance", "linear_tolerance", "adaptive_forcing"}, "solver");
    read(s, "max_iterations", c.solver.max_iterations, "solver");
    read(s, "residual_tolerance", c.solver.residual_tolerance, "solver");
    read(s, "linear_tolerance", c.solver.linear_tolerance, "solver");
    read(s, "adaptive_forcing", c.solver.adaptive_forcing, "solver");
  }
  if (j.contains("estimates")) {
    const auto& e = j["estimates"];
    only_keys(e, {"tolerance", "prop21_tolerance", "identity_tolerance", "bisectional_samples"}, "estimates");
    read(e, "tolerance", c.estimate_tolerance, "estimates");
    read(e, "prop21_tolerance", c.prop21_tolerance, "estimates");
    read(e, "identity_tolerance", c.identity_tolerance, "estimates");
    read(e, "bisectional_samples", c.bisectional_samples, "estimates");
  }
  if (j.contains("abp")) {
    const auto& a = j["abp"];
    only_keys(a, {"M_pts", "quadratic_count", "parabolic_count"}, "abp");
    read(a, "M_pts", c.abp.M_pts, "abp");
    read(a, "quadratic_count", c.abp.quadratic_count, "abp");
    read(a, "parabolic_count", c.abp.parabolic_count, "abp");
  }
  if (j.contains("output")) {
    only_keys(j["output"], {"dir"}, "output");
    std::string dir = c.output_dir.string();
    read(j["output"], "dir", dir, "output");
    c.output_dir = dir;
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json F;
  if (c.F.kind == FSpec::Kind::manufactured) {
    F = {{"kind", "manufactured"}, {"amplitude", c.F.amplitude}, {"frequency", c.F.frequency}, {"modes", c.F.modes}};
  } else {
    json modes = json::array();
    for (const auto& m : c.F.coefficients) modes.push_back({{"k", m.k}, {"cos", m.c}, {"sin", m.s}});
    F = {{"kind", "explicit"}, {"constant", c.F.constant}, {"coefficients", modes}};
  }
  return {
      {"n", c.n},
      {"N", c.N},
      {"seed", c.seed},
      {"period", c.period},
      {"mode", mode_name(c.mode)},
      {"omega", write_metric(c.omega)},
      {"chi", write_metric(c.chi)},
      {"F", F},
      {"flow",
       {{"T", c.T},
        {"monitor_interval", c.monitor_interval},
        {"integrator", c.flow.integrator == Integrator::rk4 ? "rk4" : "implicit_euler"},
        {"dt", c.flow.dt},
        {"kappa", c.flow.kappa},
        {"max_halvings", c.flow.max_halvings},
        {"newton_tolerance", c.flow.newton_tolerance},
        {"monitor_tolerance", c.flow.monitor_tolerance},
        {"attach_estimates", c.flow.attach_estimates}}},
      {"solver",
       {{"max_iterations", c.solver.max_iterations},
        {"residual_tolerance", c.solver.residual_tolerance},
        {"linear_tolerance", c.solver.linear_tolerance},
        {"adaptive_forcing", c.solver.adaptive_forcing}}},
      {"estimates",
       {{"tolerance", c.estimate_tolerance},
        {"prop21_tolerance", c.prop21_tolerance},
        {"identity_tolerance", c.identity_tolerance},
        {"bisectional_samples", c.bisectional_samples}}},
      {"abp",
       {{"M_pts", c.abp.M_pts}, {"quadratic_count", c.abp.quadratic_count}, {"parabolic_count", c.abp.parabolic_count}}},
      {"output", {{"dir", c.output_dir.string()}}},
  };
}

Problem build_problem(const ExperimentConfig& c) {
  c.validate();
  TorusGrid grid(c.n, c.N, c.period);
  auto omega = build_metric(c, grid, c.omega, 1);
  auto chi = build_metric(c, grid, c.chi, 3);
  if (c.F.kind == FSpec::Kind::manufactured) {
    std::mt19937_64 rng(derive_seed(c.seed, 5));
    ScalarField phi_star(grid);
    if (c.F.amplitude > 0.0)
      phi_star = TrigPolynomial::random(c.n, rng, c.F.modes, c.F.frequency, c.F.amplitude, c.period).sample(grid);
    auto F = manufacture_F(omega, chi, phi_star);
    return {grid, omega, chi, F, phi_star};
  }
  TrigPolynomial f(c.n, c.period);
  for (const auto& m : c.F.coefficients) f.add(m);
  auto F = f.sample(grid);
  F += c.F.constant;
  return {grid, omega, chi, F, std::nullopt};
}

}  // namespace dlab
