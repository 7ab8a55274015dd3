#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "dlab/abp.hpp"
#include "dlab/donaldson.hpp"
#include "dlab/estimates.hpp"
#include "dlab/geometry.hpp"
#include "dlab/jflow.hpp"

namespace dlab {

inline constexpr int report_schema_version = 1;

nlohmann::json to_json(const Condition& c);
nlohmann::json to_json(const StabilityReport& r);
nlohmann::json to_json(const SolveResult& r);
nlohmann::json to_json(const EstimateParameters& p);
nlohmann::json to_json(const EstimateReport& r);
nlohmann::json to_json(const BisectionalBound& b);
nlohmann::json to_json(const LambdaChoice& c);
nlohmann::json to_json(const MonitorRecord& m);
nlohmann::json to_json(const TrajectoryEstimates& t);
nlohmann::json to_json(const EllipticABP& r);
nlohmann::json to_json(const DriftABP& r);
nlohmann::json to_json(const ParabolicABP& r);

// Throws Error unless the report carries the schema version, the required
// top-level keys and only finite numbers.
void validate_report(const nlohmann::json& report);

struct TimeSeriesRow {
  double t = 0.0;
  double sup_G = 0.0;
  double sup_H = 0.0;
  double dpdt_sup = 0.0;
  double lemma21_min_margin = 0.0;
  double trace_residual_sup = 0.0;
  double positivity_margin = 0.0;
  bool has_estimates = true;  // sup_G, sup_H and the lemma margin are left empty otherwise
};

std::string time_series_csv(const std::vector<TimeSeriesRow>& rows);

}  // namespace dlab
