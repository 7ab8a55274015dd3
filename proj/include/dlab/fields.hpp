#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "dlab/grid.hpp"
#include "dlab/hermitian.hpp"

namespace dlab {

// Real trigonometric polynomial sum_m c_m cos(theta_m) + s_m sin(theta_m) with
// theta_m = (2 pi / period) <k_m, x>, evaluated together with exact derivatives.
class TrigPolynomial {
public:
  struct Mode {
    std::array<int, 4> k{0, 0, 0, 0};
    double c = 0.0;
    double s = 0.0;
  };

  TrigPolynomial(int n, double period = 1.0) : n_(n), period_(period) {}

  // Random band-limited polynomial with |k_a| <= max_frequency, scaled so the
  // operator norm of its complex Hessian never exceeds ddbar_bound.
  static TrigPolynomial random(int n, std::mt19937_64& rng, int modes, int max_frequency, double ddbar_bound,
                               double period = 1.0);
  // amplitude * sum_{m>=1} q^m cos(m theta), theta along wavevector k.
  static TrigPolynomial poisson(int n, std::array<int, 4> k, double q, double amplitude, int terms = 200,
                                double period = 1.0);

  void add(const Mode& m) { modes_.push_back(m); }
  TrigPolynomial& scale(double s) {
    for (auto& m : modes_) m.c *= s, m.s *= s;
    return *this;
  }
  // Rescale so that ddbar_bound() equals b.
  TrigPolynomial& normalize_ddbar(double b) { return scale(b / ddbar_bound()); }
  const std::vector<Mode>& modes() const { return modes_; }
  int n() const { return n_; }
  int max_frequency() const;
  double ddbar_bound() const;

  double value(const std::array<double, 4>& x) const;
  double derivative(int a, const std::array<double, 4>& x) const;
  double derivative(int a, int b, const std::array<double, 4>& x) const;
  // Real partial derivative along the listed axes (any order).
  double partial(const std::vector<int>& axes, const std::array<double, 4>& x) const;
  // d u / d z_j
  cd holomorphic_gradient(int j, const std::array<double, 4>& x) const;
  // M(i,j) = u_{i jbar}
  HMat mixed_hessian(const std::array<double, 4>& x) const;
  // M(i,j) = u_{ij}
  HMat holomorphic_hessian(const std::array<double, 4>& x) const;

  ScalarField sample(const TorusGrid& grid) const;

private:
  int n_;
  double period_;
  std::vector<Mode> modes_;
};

// Deterministic stream derivation so independent quantities drawn from one
// user seed never share a generator state.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace dlab
