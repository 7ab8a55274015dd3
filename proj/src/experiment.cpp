#include "dlab/experiment.hpp"

#include <fftw3.h>

#include <Eigen/Core>
#include <algorithm>
#include <fstream>

#include "dlab/abp.hpp"
#include "dlab/donaldson.hpp"
#include "dlab/error.hpp"
#include "dlab/estimates.hpp"
#include "dlab/geometry.hpp"
#include "dlab/jflow.hpp"
#include "dlab/report.hpp"

#ifndef DLAB_VERSION
#define DLAB_VERSION "0.0.0"
#endif

namespace dlab {

using nlohmann::json;

namespace {

struct StageError {
  std::string stage, kind, message;
};

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw StageError{name, e.kind(), e.what()};
  } catch (const std::invalid_argument& e) {
    throw StageError{name, "InvalidArgument", e.what()};
  }
}

double mean_adjusted_distance(const ScalarField& a, const ScalarField& b) {
  ScalarField d = a - b;
  d += -d.mean();
  return d.sup_abs();
}

struct Estimates {
  BisectionalBound bisectional;
  LambdaChoice lambda;
  EstimateParameters params;
};

Estimates choose_parameters(const Problem& p, const ExperimentConfig& c) {
  Estimates e;
  e.bisectional = bisectional_lower_bound(curvature_tensor(p.omega), p.omega, c.bisectional_samples, c.seed);
  e.lambda = choose_lambda(p.omega, p.chi, e.bisectional.K);
  e.params.K = e.bisectional.K;
  e.params.lambda = e.lambda.lambda;
  e.params.C_explicit = explicit_constant_C(p.omega, p.chi, p.F);
  e.params.tolerance = c.estimate_tolerance;
  return e;
}

void elliptic_pipeline(const ExperimentConfig& c, const Problem& p, json& results, json& pass) {
  auto solved = stage("solve", [&] { return newton_solve(p.omega, p.chi, p.F, c.solver); });
  results["solve"] = to_json(solved);
  pass["converged"] = solved.residual_sup < c.solver.residual_tolerance;
  if (p.phi_star) results["phi_star_error"] = mean_adjusted_distance(solved.phi, *p.phi_star);

  auto stability = stage("stability", [&] { return stability_report(p.omega, p.chi, p.F); });
  results["stability"] = to_json(stability);

  auto est = stage("estimates", [&] { return choose_parameters(p, c); });
  auto report = stage("estimates", [&] { return gradient_estimate_report(p.omega, p.chi, solved.phi, p.F, est.params); });
  results["bisectional"] = to_json(est.bisectional);
  results["lambda_choice"] = to_json(est.lambda);
  results["parameters"] = to_json(est.params);
  results["estimates"] = to_json(report);

  if (c.mode != Mode::verify) return;
  pass["trace_identity"] = solved.residual_sup < 1e-8;
  pass["lemma21"] = report.lemma21_margin >= -report.lemma21_slack;
  pass["det_h"] = report.det_h_margin >= 0.0;
  pass["eig_h"] = report.eig_h_margin >= 0.0;
  pass["prop21"] = report.prop21_residual < c.prop21_tolerance;
  pass["integral_identity"] = report.integral_identity_gap < c.identity_tolerance;
  if (p.phi_star) pass["manufactured_recovery"] = results["phi_star_error"].get<double>() < 1e-8;
}

std::vector<TimeSeriesRow> flow_pipeline(const ExperimentConfig& c, const Problem& p, json& results, json& pass,
                                         bool& violated) {
  results["stability"] = to_json(stage("stability", [&] { return stability_report(p.omega, p.chi, p.F); }));
  ScalarField phi0(p.grid);
  auto tr = stage("flow", [&] { return run_flow(p.omega, p.chi, p.F, phi0, c.T, c.monitor_interval, c.flow); });
  violated = tr.monitor_violation;

  json monitor = json::array();
  for (const auto& m : tr.monitor) monitor.push_back(to_json(m));
  results["flow"] = {{"T", tr.T}, {"steps", tr.steps}, {"monitor_violation", tr.monitor_violation}, {"monitor", monitor}};
  pass["maximum_principle"] = !tr.monitor_violation;

  std::vector<TimeSeriesRow> rows;
  double min_positivity = tr.states.front().positivity_margin;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const auto& s = tr.states[k];
    TimeSeriesRow row;
    row.t = s.t;
    row.dpdt_sup = tr.monitor[k].dpdt_sup;
    row.positivity_margin = s.positivity_margin;
    row.trace_residual_sup = stage("flow", [&] { return trace_residual(p.omega, p.chi, s.phi, p.F).sup_abs(); });
    row.has_estimates = tr.estimates.has_value();
    if (tr.estimates) {
      const auto& r = tr.estimates->reports[k];
      row.sup_G = r.sup_G;
      row.sup_H = r.sup_H;
      row.lemma21_min_margin = r.lemma21_margin;
    }
    min_positivity = std::min(min_positivity, s.positivity_margin);
    rows.push_back(row);
  }
  pass["positivity"] = min_positivity > 0.0;

  const auto& last = tr.states.back();
  results["terminal"] = {{"t", last.t}, {"trace_residual_sup", rows.back().trace_residual_sup},
                         {"positivity_margin", last.positivity_margin}};
  if (p.phi_star) results["terminal"]["phi_star_distance"] = mean_adjusted_distance(last.phi, *p.phi_star);
  if (tr.parameters) results["parameters"] = to_json(*tr.parameters);
  if (tr.estimates) {
    results["estimates"] = to_json(*tr.estimates);
    bool lemma = true;
    for (const auto& r : tr.estimates->reports) lemma = lemma && r.lemma21_margin >= -r.lemma21_slack;
    pass["lemma31"] = lemma;
  }
  return rows;
}

void abp_pipeline(const ExperimentConfig& c, json& results, json& pass) {
  using Point = std::vector<double>;
  auto dom = BoxDomain::cube(2, -1.0, 1.0, c.abp.M_pts);
  auto u = dom.sample([](const Point& x) { return 1.0 - x[0] * x[0] - x[1] * x[1]; });
  auto par = stage("abp.paraboloid", [&] { return abp_elliptic_check(u, dom); });
  double ratio = par.bound > 0.0 ? par.U / par.bound : 0.0;
  results["paraboloid"] = to_json(par);
  results["paraboloid"]["ratio"] = ratio;
  pass["paraboloid_ratio"] = ratio >= 0.85 && ratio <= 1.0;
  bool sound = verify_contact_set(u, dom, par.contact);

  int elliptic = 0, drift = 0, count = 0;
  double worst_elliptic = 0.0, worst_drift = 0.0;
  stage("abp.quadratic", [&] {
    for (const auto& inst : concave_quadratic_family(c.abp.quadratic_count, derive_seed(c.seed, 11))) {
      auto e = abp_elliptic_check(inst.u, inst.dom);
      sound = sound && verify_contact_set(inst.u, inst.dom, e.contact);
      elliptic += e.pass;
      if (e.bound > 0.0) worst_elliptic = std::max(worst_elliptic, e.U / e.bound);
      auto r = abp_drift_check(inst.u, inst.a, inst.f, inst.dom);
      drift += r.pass;
      if (r.bound > 0.0) worst_drift = std::max(worst_drift, r.U / r.bound);
      ++count;
    }
  });
  results["quadratic_corpus"] = {{"count", count},
                                 {"elliptic_passed", elliptic},
                                 {"drift_passed", drift},
                                 {"worst_elliptic_ratio", worst_elliptic},
                                 {"worst_drift_ratio", worst_drift}};
  pass["quadratic_elliptic"] = elliptic == count;
  pass["quadratic_drift"] = drift == count;
  pass["contact_soundness"] = sound;

  int parabolic = 0, pcount = 0;
  double worst_parabolic = 0.0;
  stage("abp.parabolic", [&] {
    for (const auto& inst : paraboloid_family(c.abp.parabolic_count, derive_seed(c.seed, 12))) {
      auto r = abp_parabolic_check(inst.u, inst.b, inst.f, inst.dom);
      parabolic += r.pass;
      if (r.bound > 0.0) worst_parabolic = std::max(worst_parabolic, r.gap / r.bound);
      ++pcount;
    }
  });
  results["parabolic_family"] = {{"count", pcount},
                                 {"passed", parabolic},
                                 {"constant", parabolic_abp_constant},
                                 {"worst_ratio", worst_parabolic}};
  pass["parabolic_family"] = parabolic == pcount;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace

json run_manifest(const ExperimentConfig& c) {
  return {{"schema_version", report_schema_version},
          {"seed", c.seed},
          {"mode", mode_name(c.mode)},
          {"versions",
           {{"donaldson-lab", DLAB_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"fftw", std::string(fftw_version)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"compiler", __VERSION__}}}};
}

RunOutcome run_experiment(ExperimentConfig c, const RunOptions& opts) {
  if (opts.seed) c.seed = *opts.seed;
  if (opts.mode) c.mode = *opts.mode;
  if (opts.out_dir) c.output_dir = *opts.out_dir;
  c.flow.seed = c.seed;
  c.flow.bisectional_samples = c.bisectional_samples;
  c.flow.estimate_tolerance = c.estimate_tolerance;
  c.validate();

  RunOutcome out;
  out.out_dir = c.output_dir;
  json results = json::object(), pass = json::object();
  std::vector<TimeSeriesRow> rows;
  bool violated = false;
  json report = {{"schema_version", report_schema_version}, {"mode", mode_name(c.mode)}, {"config", to_json(c)}};
  report["config"].erase("output");

  try {
    if (c.mode == Mode::abp) {
      abp_pipeline(c, results, pass);
    } else {
      auto problem = stage("build_problem", [&] { return build_problem(c); });
      if (c.mode == Mode::flow) rows = flow_pipeline(c, problem, results, pass, violated);
      else elliptic_pipeline(c, problem, results, pass);
    }
    report["status"] = "ok";
    if (violated && opts.strict) {
      report["status"] = "monitor_violation";
      out.exit_code = exit_code::monitor_violation;
    }
  } catch (const StageError& e) {
    report["status"] = "error";
    report["error"] = {{"stage", e.stage}, {"kind", e.kind}, {"message", e.message}};
    out.exit_code = exit_code::numerical_failure;
  }
  report["results"] = results;
  report["pass"] = pass;
  validate_report(report);

  std::filesystem::create_directories(c.output_dir);
  write_file(c.output_dir / "report.json", report.dump(2) + "\n");
  write_file(c.output_dir / "manifest.json", run_manifest(c).dump(2) + "\n");
  if (c.mode == Mode::flow && !rows.empty()) write_file(c.output_dir / "timeseries.csv", time_series_csv(rows));
  out.report = std::move(report);
  return out;
}

}  // namespace dlab
