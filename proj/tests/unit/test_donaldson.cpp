#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dlab/calculus.hpp"
#include "dlab/donaldson.hpp"
#include "dlab/error.hpp"
#include "dlab/geometry.hpp"
#include "dlab/spectral.hpp"
#include "dlab/trace_operator.hpp"
#include "scenarios.hpp"

using namespace dlab;

TEST_CASE("trace_residual examples") {
  auto s = scenario::make(2, 16, 1);
  SUBCASE("F manufactured from phi = 0") {
    ScalarField zero(s.grid);
    auto F = manufacture_F(s.omega, s.chi, zero);
    CHECK(trace_residual(s.omega, s.chi, zero, F).sup_abs() < 1e-12);
  }
  SUBCASE("identity data") {
    TorusGrid g(2, 8);
    auto id = HermitianMetricField::constant(g, HMat::Identity(2, 2));
    CHECK(trace_residual(id, id, ScalarField(g), ScalarField(g)).sup_abs() < 1e-15);
  }
  SUBCASE("n = 1 closed form: omega = e^F chi_phi") {
    auto t = scenario::make(1, 32, 2);
    auto F = ScalarField::sample(t.grid, [&](auto x) {
      double chi_phi = (t.chi0 + t.chi_potential.mixed_hessian(x) + t.phi_star.mixed_hessian(x))(0, 0).real();
      double om = (t.omega0 + t.omega_potential.mixed_hessian(x))(0, 0).real();
      return std::log(om / chi_phi);
    });
    CHECK(trace_residual(t.omega, t.chi, t.phi, F).sup_abs() < 1e-10);
  }
  SUBCASE("non-positive chi_phi") {
    TorusGrid g(1, 16);
    auto id = HermitianMetricField::constant(g, HMat::Identity(1, 1));
    auto phi = ScalarField::sample(g, [](auto x) { return 0.2 * std::sin(2 * std::numbers::pi * x[0]); });
    CHECK_THROWS_AS(trace_residual(id, id, phi, ScalarField(g)), PositivityLost);
  }
}

TEST_CASE("manufacture_F examples") {
  TorusGrid g(2, 8);
  auto s = scenario::make(2, 8, 3);
  CHECK(manufacture_F(s.chi, s.chi, ScalarField(g)).sup_abs() < 1e-14);
  auto t = scenario::make(1, 32, 4);
  auto F = manufacture_F(t.omega, t.chi, t.phi);
  double err = 0;
  for (std::size_t p = 0; p < t.grid.size(); ++p) {
    auto x = t.grid.coords(p);
    double chi_phi = (t.chi0 + t.chi_potential.mixed_hessian(x) + t.phi_star.mixed_hessian(x))(0, 0).real();
    double om = (t.omega0 + t.omega_potential.mixed_hessian(x))(0, 0).real();
    err = std::max(err, std::abs(F[p] - std::log(om / chi_phi)));
  }
  CHECK(err < 1e-12);
  TorusGrid h(1, 16);
  auto id = HermitianMetricField::constant(h, HMat::Identity(1, 1));
  // chi_phi = 1 - (2 pi)^2 A/4 * ... vanishes somewhere for A = 1/pi^2
  auto degenerate = ScalarField::sample(h, [](auto x) { return std::sin(2 * std::numbers::pi * x[0]) / std::pow(std::numbers::pi, 2); });
  CHECK_THROWS_AS(manufacture_F(id, id, degenerate), PositivityLost);
}

TEST_CASE("newton_solve recovers manufactured solutions") {
  for (auto [n, N] : {std::pair{1, 32}, std::pair{2, 16}}) {
    for (std::uint64_t seed : {10u, 11u, 12u}) {
      auto s = scenario::make(n, N, seed);
      auto F = manufacture_F(s.omega, s.chi, s.phi);
      auto res = newton_solve(s.omega, s.chi, F);
      ScalarField expect = s.phi;
      expect += -expect.mean();
      CHECK((res.phi - expect).sup_abs() < 1e-8);
      CHECK(res.residual_sup < 1e-10);
      CHECK(std::abs(res.phi.mean()) < 1e-14);
      CHECK(trace_residual(s.omega, s.chi, res.phi, F).sup_abs() < 1e-10);
      CHECK(res.iterations <= 30);
    }
  }
}

TEST_CASE("n = 1 Newton agrees with the direct linear spectral solve") {
  auto s = scenario::make(1, 32, 20);
  auto F = manufacture_F(s.omega, s.chi, s.phi);
  // phi_{z zbar} = e^{-F} g - chi
  ScalarField rhs(s.grid);
  for (std::size_t p = 0; p < rhs.size(); ++p) rhs[p] = std::exp(-F[p]) * s.omega[p](0, 0).real() - s.chi[p](0, 0).real();
  const auto& sp = Spectral::for_grid(s.grid);
  auto sym = sp.mixed(0, 0, 0).s;
  for (auto& v : sym) v = v != 0.0 ? 1.0 / v : 0.0;
  ScalarField direct(s.grid);
  sp.apply_multiplier(sp.forward(rhs), sym, direct.data());
  auto res = newton_solve(s.omega, s.chi, F);
  CHECK((res.phi - direct).sup_abs() < 1e-10);
}

TEST_CASE("exact initial solution converges immediately") {
  auto s = scenario::make(2, 8, 5);
  auto res = newton_solve(s.chi, s.chi, ScalarField(s.grid));
  CHECK(res.iterations <= 1);
  CHECK(res.phi.sup_abs() < 1e-12);
}

TEST_CASE("solver options and budget") {
  SolverOptions bad;
  bad.residual_tolerance = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.max_iterations = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.damping = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  auto s = scenario::make(1, 32, 6, 0.3, 0.3, 0.6);
  auto F = manufacture_F(s.omega, s.chi, s.phi);
  SolverOptions one;
  one.max_iterations = 1;
  CHECK_THROWS_AS(newton_solve(s.omega, s.chi, F, one), NoConvergence);
  TorusGrid g(1, 32);
  auto bad_start = ScalarField::sample(g, [](auto x) { return 0.5 * std::sin(2 * std::numbers::pi * x[0]); });
  CHECK_THROWS_AS(newton_solve(s.omega, s.chi, F, {}, bad_start), PositivityLost);
}

TEST_CASE("solver error decays spectrally for analytic non-band-limited data") {
  std::vector<double> errs;
  for (int N : {16, 32, 64}) {
    TorusGrid g(1, N);
    auto u = TrigPolynomial::poisson(1, {1, 1, 0, 0}, 0.55, 1.0).normalize_ddbar(0.4);
    auto b = TrigPolynomial::poisson(1, {1, -2, 0, 0}, 0.5, 1.0).normalize_ddbar(0.3);
    auto chi = metric_from_potential(g, HMat::Identity(1, 1), b.sample(g));
    auto omega = HermitianMetricField::constant(g, 1.3 * HMat::Identity(1, 1));
    auto phi = u.sample(g);
    // F from the exact phi_star, independent of the discrete derivatives
    auto F = ScalarField::sample(g, [&](auto x) {
      return std::log(1.3 / (1.0 + b.mixed_hessian(x)(0, 0).real() + u.mixed_hessian(x)(0, 0).real()));
    });
    // Discrete solvability needs mean(g e^{-F}) = mean(chi); the exact F misses it by an aliasing-size constant.
    double num = 0, den = 0;
    for (std::size_t p = 0; p < g.size(); ++p) num += 1.3 * std::exp(-F[p]), den += chi[p](0, 0).real();
    F += std::log(num / den);
    auto res = newton_solve(omega, chi, F);
    phi += -phi.mean();
    errs.push_back((res.phi - phi).sup_abs());
  }
  MESSAGE("errors " << errs[0] << " " << errs[1] << " " << errs[2]);
  CHECK(errs[0] / errs[1] > 10);
  CHECK(errs[1] / errs[2] > 10);
}

TEST_CASE("residual Jacobian is -Delta_h") {
  for (int n : {1, 2}) {
    auto s = scenario::make(n, n == 1 ? 32 : 16, 30 + n);
    auto F = manufacture_F(s.omega, s.chi, ScalarField(s.grid));
    std::mt19937_64 rng(8);
    auto psi = TrigPolynomial::random(n, rng, 4, 2, 1.0).sample(s.grid);
    double eps = 1e-4;
    ScalarField plus = s.phi, minus = s.phi;
    for (std::size_t p = 0; p < plus.size(); ++p) plus[p] += eps * psi[p], minus[p] -= eps * psi[p];
    auto fd = trace_residual(s.omega, s.chi, plus, F) - trace_residual(s.omega, s.chi, minus, F);
    fd *= 1.0 / (2 * eps);
    TraceOperator op(s.omega, s.chi);
    auto st = op.evaluate(s.phi, true);
    ScalarField lap(s.grid);
    op.laplacian(st.h, psi.data(), lap.data());
    auto h_field = HermitianMetricField(s.grid, Variance::contravariant, TraceOperator::join(st.h, n));
    CHECK((lap - laplacian_wrt(h_field, psi)).sup_abs() < 1e-10 * (1 + lap.sup_abs()));
    CHECK((fd + lap).sup_abs() < 1e-6 * lap.sup_abs());
  }
}

TEST_CASE("jflow_constant") {
  TorusGrid g(2, 8);
  auto s = scenario::make(2, 8, 40);
  CHECK(jflow_constant(s.chi, s.chi) == doctest::Approx(1.0).epsilon(1e-14));
  auto chi = HermitianMetricField::constant(g, s.chi0);
  auto two = HermitianMetricField::constant(g, 2.0 * s.chi0);
  CHECK(jflow_constant(two, chi) == doctest::Approx(2.0).epsilon(1e-14));
  auto om = HermitianMetricField::constant(g, s.omega0);
  CHECK(jflow_constant(om, chi) == doctest::Approx((s.chi0.inverse() * s.omega0).trace().real() / 2).epsilon(1e-12));
  // cohomological: integral of tr_chi omega det chi is unchanged by a potential in chi
  CHECK(jflow_constant(om, s.chi) == doctest::Approx(jflow_constant(om, chi)).epsilon(1e-10));
}

TEST_CASE("stability_report examples") {
  TorusGrid g(2, 8);
  auto id = HermitianMetricField::constant(g, HMat::Identity(2, 2));
  auto two = HermitianMetricField::constant(g, 2.0 * HMat::Identity(2, 2));
  ScalarField zero(g);
  auto r = stability_report(id, id, zero);
  CHECK(r.li_condition.margin == doctest::Approx(0.5));
  CHECK(r.li_condition.holds);
  auto r2 = stability_report(two, id, zero);
  CHECK(r2.jflow_constant == doctest::Approx(2.0));
  CHECK(r2.donaldson_necessary.margin == doctest::Approx(2.0));
  CHECK(r2.donaldson_necessary.holds);
  CHECK(r2.thm12_hypothesis.margin == doctest::Approx(1.0));
  CHECK(r2.thm12_hypothesis.holds);
  CHECK(r2.song_weinkove.margin == doctest::Approx(2.0));
  CHECK(r2.sun_cone.margin == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(!r2.sun_cone.holds);
  TorusGrid g1(1, 8);
  auto id1 = HermitianMetricField::constant(g1, HMat::Identity(1, 1));
  auto r1 = stability_report(id1, id1, ScalarField(g1));
  CHECK(r1.song_weinkove.vacuous);
  CHECK(r1.sun_cone.vacuous);
  CHECK(r1.li_condition.margin == doctest::Approx(1.0));
}

TEST_CASE("li condition is invariant under (omega, e^F) -> (s omega, s e^F)") {
  auto s = scenario::make(2, 8, 50);
  std::mt19937_64 rng(3);
  auto F = TrigPolynomial::random(2, rng, 3, 2, 0.5).sample(s.grid);
  double scale = 2.7;
  std::vector<HMat> scaled(s.omega.values());
  for (auto& m : scaled) m *= scale;
  HermitianMetricField om2(s.grid, Variance::covariant, scaled);
  ScalarField F2 = F;
  F2 += std::log(scale);
  auto a = stability_report(s.omega, s.chi, F);
  auto b = stability_report(om2, s.chi, F2);
  CHECK(a.li_condition.margin == doctest::Approx(b.li_condition.margin).epsilon(1e-12));
  CHECK(a.li_condition.holds == b.li_condition.holds);
}
