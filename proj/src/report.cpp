#include "dlab/report.hpp"

#include <cmath>
#include <cstdio>

#include "dlab/error.hpp"

namespace dlab {

using nlohmann::json;

json to_json(const Condition& c) {
  json j = {{"holds", c.holds}, {"vacuous", c.vacuous}};
  if (std::isfinite(c.margin)) j["margin"] = c.margin;
  return j;
}

json to_json(const StabilityReport& r) {
  return {{"li_condition", to_json(r.li_condition)},
          {"donaldson_necessary", to_json(r.donaldson_necessary)},
          {"song_weinkove", to_json(r.song_weinkove)},
          {"sun_cone", to_json(r.sun_cone)},
          {"thm12_hypothesis", to_json(r.thm12_hypothesis)},
          {"jflow_constant", r.jflow_constant}};
}

json to_json(const SolveResult& r) {
  return {{"iterations", r.iterations},
          {"residual_sup", r.residual_sup},
          {"krylov_iterations", r.krylov_iterations},
          {"residual_history", r.residual_history}};
}

json to_json(const EstimateParameters& p) {
  return {{"lambda", p.lambda}, {"K", p.K}, {"C_explicit", p.C_explicit}, {"tolerance", p.tolerance}};
}

json to_json(const EstimateReport& r) {
  return {{"lambda", r.lambda},
          {"K", r.K},
          {"C_explicit", r.C_explicit},
          {"sup_G", r.sup_G},
          {"sup_H", r.sup_H},
          {"C_thm11", r.C_thm11},
          {"C_first_power", r.C_first_power},
          {"argmax_G", r.argmax_G},
          {"prop21_residual", r.prop21_residual},
          {"lemma21_margin", r.lemma21_margin},
          {"lemma21_slack", r.lemma21_slack},
          {"det_h_margin", r.det_h_margin},
          {"eig_h_margin", r.eig_h_margin},
          {"laplacian_sup", r.laplacian_sup},
          {"integral_identity_gap", r.integral_identity_gap},
          {"cone", to_json(r.cone)},
          {"dpdt_sup", r.dpdt_sup}};
}

json to_json(const BisectionalBound& b) {
  return {{"K", b.K},           {"min_ratio", b.min_ratio}, {"argmin", b.argmin},
          {"samples", b.samples}, {"seed", b.seed},         {"exhaustive", b.exhaustive}};
}

json to_json(const LambdaChoice& c) {
  return {{"lambda", c.lambda}, {"Lambda", c.Lambda}, {"margin", c.margin}, {"coefficient_min", c.coefficient_min}};
}

json to_json(const MonitorRecord& m) { return {{"t", m.t}, {"dpdt_sup", m.dpdt_sup}, {"violated", m.violated}}; }

json to_json(const TrajectoryEstimates& t) {
  json reports = json::array();
  for (const auto& r : t.reports) reports.push_back(to_json(r));
  return {{"inf_phi", t.inf_phi},
          {"sup_H", t.sup_H},
          {"C_first_power", t.C_first_power},
          {"argmax_point", t.argmax_point},
          {"argmax_time", t.argmax_time},
          {"reports", reports}};
}

json to_json(const EllipticABP& r) {
  return {{"U", r.U},
          {"integral", r.integral},
          {"constant", r.constant},
          {"bound", r.bound},
          {"pass", r.pass},
          {"clipped", r.clipped},
          {"contact_points", r.contact.count},
          {"gradient_cap", r.contact.gradient_cap},
          {"warnings", r.warnings}};
}

json to_json(const DriftABP& r) {
  return {{"U", r.U},         {"norm", r.norm}, {"constant", r.constant},     {"bound", r.bound},
          {"pass", r.pass},   {"degenerate", r.degenerate}, {"warnings", r.warnings}};
}

json to_json(const ParabolicABP& r) {
  return {{"sup_u", r.sup_u},
          {"sup_boundary", r.sup_boundary},
          {"gap", r.gap},
          {"norm", r.norm},
          {"constant", r.constant},
          {"bound", r.bound},
          {"E_fraction", r.E_fraction},
          {"pass", r.pass},
          {"degenerate", r.degenerate},
          {"warnings", r.warnings}};
}

namespace {

void check_finite(const json& j, const std::string& path) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) throw Error("non-finite report field " + path);
  if (j.is_null()) throw Error("null report field " + path);
  if (j.is_object())
    for (const auto& [k, v] : j.items()) check_finite(v, path + "." + k);
  if (j.is_array())
    for (std::size_t i = 0; i < j.size(); ++i) check_finite(j[i], path + "[" + std::to_string(i) + "]");
}

}  // namespace

void validate_report(const json& report) {
  if (!report.is_object()) throw Error("report must be an object");
  for (const char* key : {"schema_version", "mode", "status", "config", "pass"})
    if (!report.contains(key)) throw Error(std::string("report is missing '") + key + "'");
  if (report["schema_version"] != report_schema_version) throw Error("unexpected report schema version");
  if (!report["pass"].is_object()) throw Error("report 'pass' must be an object");
  for (const auto& [k, v] : report["pass"].items())
    if (!v.is_boolean()) throw Error("pass flag '" + k + "' is not a boolean");
  check_finite(report, "report");
}

std::string time_series_csv(const std::vector<TimeSeriesRow>& rows) {
  std::string out = "t,sup_G,sup_H,dpdt_sup,lemma21_min_margin,trace_residual_sup,positivity_margin\n";
  char buf[64];
  auto cell = [&](double v, bool present, char sep) {
    if (present) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
    }
    out += sep;
  };
  for (const auto& r : rows) {
    cell(r.t, true, ',');
    cell(r.sup_G, r.has_estimates, ',');
    cell(r.sup_H, r.has_estimates, ',');
    cell(r.dpdt_sup, true, ',');
    cell(r.lemma21_min_margin, r.has_estimates, ',');
    cell(r.trace_residual_sup, true, ',');
    cell(r.positivity_margin, true, '\n');
  }
  return out;
}

}  // namespace dlab
