#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dlab/calculus.hpp"
#include "dlab/fields.hpp"
#include "dlab/geometry.hpp"
#include "oracles.hpp"

using namespace dlab;

TEST_CASE("laplacian, gradient norm and pairing against closed-form contractions") {
  std::mt19937_64 rng(3);
  for (int n : {1, 2}) {
    TorusGrid g(n, n == 1 ? 32 : 16);
    auto a = TrigPolynomial::random(n, rng, 5, 2, 0.4);
    auto u = TrigPolynomial::random(n, rng, 5, 3, 1.0);
    auto v = TrigPolynomial::random(n, rng, 5, 3, 1.0);
    HMat g0 = oracle::random_spd(n, rng);
    auto metric = metric_from_potential(g, g0, a.sample(g));
    auto inv = metric.inverse();
    auto lap = laplacian_wrt(inv, u.sample(g));
    auto norm = gradient_norm_wrt(inv, u.sample(g));
    auto pair = pairing_wrt(inv, complex_gradient(u.sample(g)), complex_gradient(v.sample(g)));
    auto pair_rev = pairing_wrt(inv, complex_gradient(v.sample(g)), complex_gradient(u.sample(g)));
    double el = 0, en = 0, ep = 0;
    for (std::size_t p = 0; p < g.size(); p += 5) {
      auto x = g.coords(p);
      HMat gm = g0 + a.mixed_hessian(x);
      HMat gi = gm.inverse();
      cd lap_exact = 0, norm_exact = 0, pair_exact = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          // g^{i jbar} = gi(j, i)
          lap_exact += gi(j, i) * oracle::wirtinger(u, {{i, false}, {j, true}}, x);
          norm_exact += gi(j, i) * oracle::wirtinger(u, {{i, false}}, x) *
                        std::conj(oracle::wirtinger(u, {{j, false}}, x));
          pair_exact += gi(j, i) * oracle::wirtinger(u, {{i, false}}, x) *
                        std::conj(oracle::wirtinger(v, {{j, false}}, x));
        }
      el = std::max(el, std::abs(lap[p] - lap_exact.real()));
      en = std::max(en, std::abs(norm[p] - norm_exact.real()));
      ep = std::max(ep, std::abs(pair[p] - pair_exact.real()));
    }
    CHECK(el < 1e-10);
    CHECK(en < 1e-10);
    CHECK(ep < 1e-10);
    CHECK((pair - pair_rev).sup_abs() < 1e-13);
  }
}

TEST_CASE("laplacian requires the inverse metric") {
  TorusGrid g(1, 8);
  auto m = HermitianMetricField::constant(g, HMat::Identity(1, 1));
  CHECK_THROWS_AS(laplacian_wrt(m, ScalarField(g)), std::invalid_argument);
}

TEST_CASE("integrate_volume uses det g and the cell volume") {
  TorusGrid g(2, 8, 2.0);
  HMat g0(2, 2);
  g0 << 2.0, cd(0.5, 0.5), cd(0.5, -0.5), 1.5;
  auto m = HermitianMetricField::constant(g, g0);
  double det = 2.0 * 1.5 - 0.5;
  CHECK(integrate_volume(ScalarField(g, 1.0), m) == doctest::Approx(det * 16.0).epsilon(1e-13));
  auto f = ScalarField::sample(g, [](auto x) { return std::cos(std::numbers::pi * x[2]); });
  CHECK(std::abs(integrate_volume(f, m)) < 1e-12);
}

TEST_CASE("matrix field derivatives match closed forms") {
  std::mt19937_64 rng(9);
  TorusGrid g(2, 16);
  auto a = TrigPolynomial::random(2, rng, 4, 2, 0.4);
  HMat g0 = oracle::random_spd(2, rng);
  auto metric = metric_from_potential(g, g0, a.sample(g));
  auto d1 = holomorphic_derivative(metric);
  auto d2 = mixed_derivative(metric);
  double e1 = 0, e2 = 0;
  for (std::size_t p = 0; p < g.size(); p += 11) {
    auto x = g.coords(p);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          e1 = std::max(e1, std::abs(d1.at(p, k)(i, j) - oracle::wirtinger(a, {{i, false}, {j, true}, {k, false}}, x)));
          for (int l = 0; l < 2; ++l)
            e2 = std::max(e2, std::abs(d2.at(p, k, l)(i, j) -
                                       oracle::wirtinger(a, {{i, false}, {j, true}, {k, false}, {l, true}}, x)));
        }
  }
  CHECK(e1 < 1e-10);
  CHECK(e2 < 1e-9);
}
