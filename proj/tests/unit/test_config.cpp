#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "dlab/config.hpp"
#include "dlab/donaldson.hpp"
#include "dlab/error.hpp"
#include "dlab/report.hpp"

using namespace dlab;
using nlohmann::json;

namespace {

json small() {
  return json::parse(R"({
    "n": 2, "N": 16, "seed": 9,
    "omega": {"amplitude": 0.2, "frequency": 1},
    "chi": {"constant": "identity"},
    "F": {"kind": "manufactured", "amplitude": 0.2, "frequency": 1}
  })");
}

}  // namespace

TEST_CASE("config parsing rejects bad documents") {
  CHECK_THROWS_AS(parse_config(json::object()), ConfigError);
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
  CHECK_THROWS_AS(parse_config(json(3)), ConfigError);

  auto with = [](const char* key, json value) {
    auto j = small();
    j[key] = std::move(value);
    return j;
  };
  CHECK_THROWS_AS(parse_config(with("bogus", 1)), ConfigError);
  CHECK_THROWS_AS(parse_config(with("n", 3)), ConfigError);
  CHECK_THROWS_AS(parse_config(with("n", "two")), ConfigError);
  CHECK_THROWS_AS(parse_config(with("N", 12)), ConfigError);
  CHECK_THROWS_AS(parse_config(with("N", 4)), ConfigError);
  CHECK_THROWS_AS(parse_config(with("mode", "plot")), ConfigError);
  CHECK_THROWS_AS(parse_config(with("flow", {{"integrator", "euler"}})), ConfigError);
  CHECK_THROWS_AS(parse_config(with("flow", {{"dt", -1.0}})), ConfigError);
  CHECK_THROWS_AS(parse_config(with("solver", {{"max_iterations", 0}})), ConfigError);
  CHECK_THROWS_AS(parse_config(with("omega", {{"constant", {{1.0, 0.5}, {0.0, 1.0}}}})), ConfigError);
  CHECK_THROWS_AS(parse_config(with("omega", {{"constant", {{1.0, 2.0}, {2.0, 1.0}}}})), ConfigError);
  CHECK_THROWS_AS(parse_config(with("omega", {{"constant", {{1.0}}}})), ConfigError);
  CHECK_THROWS_AS(parse_config(with("F", {{"kind", "explicit"}, {"coefficients", {{{"k", {0, 0, 0, 0, 1}}}}}})),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("de-aliasing rule") {
  auto j = small();
  j["N"] = 8;
  j["F"]["frequency"] = 3;
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j["F"]["amplitude"] = 0.0;
  CHECK_NOTHROW(parse_config(j));
  j["N"] = 8;
  j["F"] = {{"kind", "explicit"}, {"coefficients", {{{"k", {0, 3}}, {"cos", 0.1}}}}};
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j["N"] = 16;
  CHECK_NOTHROW(parse_config(j));
  CHECK(parse_config(j).max_frequency() == 3);
}

TEST_CASE("config round trip") {
  auto j = small();
  j["mode"] = "flow";
  j["omega"]["constant"] = {{1.5, {0.1, 0.2}}, {{0.1, -0.2}, 1.0}};
  j["flow"] = {{"T", 2.0}, {"integrator", "rk4"}, {"dt", 0.01}};
  j["estimates"] = {{"tolerance", 1e-7}, {"bisectional_samples", 16}};
  auto c = parse_config(j);
  CHECK(c.mode == Mode::flow);
  CHECK(c.flow.integrator == Integrator::rk4);
  CHECK(c.T == 2.0);
  CHECK(c.bisectional_samples == 16);
  CHECK((*c.omega.constant)(0, 1) == std::complex<double>(0.1, 0.2));
  auto echoed = to_json(c);
  CHECK(to_json(parse_config(echoed)) == echoed);
  CHECK(parse_config(small()).flow.integrator == Integrator::implicit_euler);
}

TEST_CASE("problem construction") {
  auto c = parse_config(small());
  auto a = build_problem(c), b = build_problem(c);
  REQUIRE(a.phi_star);
  CHECK(a.F.values() == b.F.values());
  CHECK(a.omega[5] == b.omega[5]);
  CHECK(trace_residual(a.omega, a.chi, *a.phi_star, a.F).sup_abs() < 1e-12);
  c.seed = 10;
  CHECK(build_problem(c).F.values() != a.F.values());

  auto j = small();
  j["n"] = 1;
  j["N"] = 16;
  j["omega"] = {{"constant", {{2.0}}}};
  j["F"] = {{"kind", "explicit"},
            {"constant", 0.25},
            {"coefficients", {{{"k", {1, 2}}, {"cos", 0.3}, {"sin", -0.1}}}}};
  auto p = build_problem(parse_config(j));
  CHECK_FALSE(p.phi_star);
  CHECK(p.omega[3](0, 0).real() == 2.0);
  double err = 0.0;
  for (std::size_t q = 0; q < p.grid.size(); ++q) {
    auto x = p.grid.coords(q);
    double arg = 2.0 * std::numbers::pi * (x[0] + 2.0 * x[1]);
    err = std::max(err, std::abs(p.F[q] - (0.25 + 0.3 * std::cos(arg) - 0.1 * std::sin(arg))));
  }
  CHECK(err < 1e-13);
}

TEST_CASE("report validation") {
  json r = {{"schema_version", report_schema_version},
            {"mode", "solve"},
            {"status", "ok"},
            {"config", json::object()},
            {"pass", {{"converged", true}}},
            {"results", {{"x", {1.0, 2.0}}}}};
  CHECK_NOTHROW(validate_report(r));
  auto bad = r;
  bad["results"]["x"][1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(validate_report(bad), Error);
  bad = r;
  bad.erase("status");
  CHECK_THROWS_AS(validate_report(bad), Error);
  bad = r;
  bad["schema_version"] = 2;
  CHECK_THROWS_AS(validate_report(bad), Error);
  bad = r;
  bad["pass"]["converged"] = 1;
  CHECK_THROWS_AS(validate_report(bad), Error);

  Condition vacuous{true, std::numeric_limits<double>::infinity(), true};
  CHECK_FALSE(to_json(vacuous).contains("margin"));
}

TEST_CASE("time series csv") {
  TimeSeriesRow a{0.0, 1.0, 2.0, 0.5, -1e-12, 1e-3, 0.9};
  TimeSeriesRow b = a;
  b.t = 0.1;
  b.has_estimates = false;
  CHECK(time_series_csv({a, b}) ==
        "t,sup_G,sup_H,dpdt_sup,lemma21_min_margin,trace_residual_sup,positivity_margin\n"
        "0,1,2,0.5,-9.9999999999999998e-13,0.001,0.90000000000000002\n"
        "0.10000000000000001,,,0.5,,0.001,0.90000000000000002\n");
}
