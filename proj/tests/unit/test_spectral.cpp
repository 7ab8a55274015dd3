#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dlab/calculus.hpp"
#include "dlab/fields.hpp"
#include "dlab/spectral.hpp"
#include "oracles.hpp"

using namespace dlab;
using std::numbers::pi;

TEST_CASE("sin 2 pi x: phi_z = pi cos 2 pi x and phi_{z zbar} = -pi^2 sin 2 pi x") {
  TorusGrid g(1, 32);
  auto phi = ScalarField::sample(g, [](auto x) { return std::sin(2 * pi * x[0]); });
  auto [grad, hess] = complex_derivatives(phi);
  double err_z = 0, err_zz = 0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    double x = g.coords(p)[0];
    err_z = std::max(err_z, std::abs(grad.v[p](0) - cd(pi * std::cos(2 * pi * x), 0)));
    err_zz = std::max(err_zz, std::abs(hess.mixed[p](0, 0) - cd(-pi * pi * std::sin(2 * pi * x), 0)));
  }
  CHECK(err_z < 1e-12);
  CHECK(err_zz < 1e-11);
}

TEST_CASE("spectral Wirtinger derivatives agree with closed forms on random trigonometric polynomials") {
  std::mt19937_64 rng(11);
  for (int n : {1, 2}) {
    TorusGrid g(n, n == 1 ? 32 : 16);
    auto u = TrigPolynomial::random(n, rng, 6, 3, 1.0);
    auto phi = u.sample(g);
    auto [grad, hess] = complex_derivatives(phi);
    double e1 = 0, e2 = 0, e3 = 0;
    for (std::size_t p = 0; p < g.size(); p += 7) {
      auto x = g.coords(p);
      for (int i = 0; i < n; ++i) {
        e1 = std::max(e1, std::abs(grad.v[p](i) - oracle::wirtinger(u, {{i, false}}, x)));
        for (int j = 0; j < n; ++j) {
          e2 = std::max(e2, std::abs(hess.mixed[p](i, j) - oracle::wirtinger(u, {{i, false}, {j, true}}, x)));
          e3 = std::max(e3, std::abs(hess.holomorphic[p](i, j) - oracle::wirtinger(u, {{i, false}, {j, false}}, x)));
        }
      }
    }
    CHECK(e1 < 1e-11);
    CHECK(e2 < 1e-10);
    CHECK(e3 < 1e-10);
  }
}

TEST_CASE("non-unit period rescales wavenumbers") {
  TorusGrid g(1, 16, 3.0);
  auto phi = ScalarField::sample(g, [](auto x) { return std::cos(2 * pi * x[1] / 3.0); });
  const auto& sp = Spectral::for_grid(g);
  auto d = sp.apply(sp.forward(phi), sp.axis(1, 1));
  double err = 0;
  for (std::size_t p = 0; p < g.size(); ++p) err = std::max(err, std::abs(d[p] + std::pow(2 * pi / 3.0, 2) * phi[p]));
  CHECK(err < 1e-11);
}

TEST_CASE("Nyquist rule: first derivative vanishes, same-axis second derivative keeps -k^2") {
  TorusGrid g(1, 16);
  auto phi = ScalarField::sample(g, [](auto x) { return std::cos(2 * pi * 8 * x[0]); });
  const auto& sp = Spectral::for_grid(g);
  auto hat = sp.forward(phi);
  auto d1 = sp.apply(hat, sp.axis(0));
  auto d2 = sp.apply(hat, sp.axis(0, 0));
  auto dxy = sp.apply(hat, sp.axis(0, 1));
  CHECK(d1.sup_abs() < 1e-10);
  CHECK(dxy.sup_abs() < 1e-10);
  double k2 = std::pow(2 * pi * 8, 2);
  for (std::size_t p = 0; p < g.size(); ++p) CHECK(d2[p] == doctest::Approx(-k2 * phi[p]).epsilon(1e-10));
}

TEST_CASE("tail fraction separates resolved and under-resolved data") {
  TorusGrid g(1, 32);
  const auto& sp = Spectral::for_grid(g);
  auto low = ScalarField::sample(g, [](auto x) { return std::sin(2 * pi * 3 * x[0]); });
  auto high = ScalarField::sample(g, [](auto x) { return std::sin(2 * pi * 3 * x[0]) + std::sin(2 * pi * 12 * x[1]); });
  CHECK(sp.tail_fraction(sp.forward(low)) < 1e-25);
  CHECK(sp.tail_fraction(sp.forward(high)) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("laplacian symbol matches the operator it describes") {
  std::mt19937_64 rng(5);
  TorusGrid g(2, 8);
  HMat m = oracle::random_spd(2, rng);
  auto u = TrigPolynomial::random(2, rng, 5, 2, 1.0);
  auto phi = u.sample(g);
  auto direct = laplacian_wrt(HermitianMetricField::constant(g, m, Variance::contravariant), phi);
  const auto& sp = Spectral::for_grid(g);
  ScalarField via(g);
  sp.apply_multiplier(sp.forward(phi), sp.laplacian_symbol(m), via.data());
  CHECK((direct - via).sup_abs() < 1e-11);
}
