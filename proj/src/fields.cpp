#include "dlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dlab {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

TrigPolynomial TrigPolynomial::random(int n, std::mt19937_64& rng, int modes, int max_frequency, double ddbar_bound,
                                      double period) {
  TrigPolynomial u(n, period);
  std::uniform_int_distribution<int> freq(-max_frequency, max_frequency);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  while (static_cast<int>(u.modes_.size()) < modes) {
    Mode m;
    bool zero = true;
    for (int a = 0; a < 2 * n; ++a) {
      m.k[a] = freq(rng);
      if (m.k[a] != 0) zero = false;
    }
    m.c = coef(rng);
    m.s = coef(rng);
    if (!zero) u.modes_.push_back(m);
  }
  double b = u.ddbar_bound();
  if (b > 0.0)
    for (auto& m : u.modes_) m.c *= ddbar_bound / b, m.s *= ddbar_bound / b;
  return u;
}

TrigPolynomial TrigPolynomial::poisson(int n, std::array<int, 4> k, double q, double amplitude, int terms,
                                       double period) {
  TrigPolynomial u(n, period);
  double w = 1.0;
  for (int m = 1; m <= terms; ++m) {
    w *= q;
    if (w < 1e-300) break;
    Mode md;
    for (int a = 0; a < 2 * n; ++a) md.k[a] = m * k[a];
    md.c = amplitude * w;
    u.modes_.push_back(md);
  }
  return u;
}

int TrigPolynomial::max_frequency() const {
  int f = 0;
  for (const auto& m : modes_)
    for (int a = 0; a < 2 * n_; ++a) f = std::max(f, std::abs(m.k[a]));
  return f;
}

double TrigPolynomial::ddbar_bound() const {
  double w = 2.0 * std::numbers::pi / period_;
  double b = 0.0;
  for (const auto& m : modes_) {
    double k2 = 0.0;
    for (int a = 0; a < 2 * n_; ++a) k2 += double(m.k[a]) * m.k[a];
    b += 0.25 * w * w * k2 * (std::abs(m.c) + std::abs(m.s));
  }
  return b;
}

namespace {
double phase(const TrigPolynomial::Mode& m, int n, double w, const std::array<double, 4>& x) {
  double t = 0.0;
  for (int a = 0; a < 2 * n; ++a) t += m.k[a] * x[a];
  return w * t;
}
}  // namespace

double TrigPolynomial::value(const std::array<double, 4>& x) const {
  double w = 2.0 * std::numbers::pi / period_, v = 0.0;
  for (const auto& m : modes_) {
    double t = phase(m, n_, w, x);
    v += m.c * std::cos(t) + m.s * std::sin(t);
  }
  return v;
}

double TrigPolynomial::derivative(int a, const std::array<double, 4>& x) const {
  double w = 2.0 * std::numbers::pi / period_, v = 0.0;
  for (const auto& m : modes_) {
    double t = phase(m, n_, w, x);
    v += w * m.k[a] * (-m.c * std::sin(t) + m.s * std::cos(t));
  }
  return v;
}

double TrigPolynomial::derivative(int a, int b, const std::array<double, 4>& x) const {
  double w = 2.0 * std::numbers::pi / period_, v = 0.0;
  for (const auto& m : modes_) {
    double t = phase(m, n_, w, x);
    v -= w * w * m.k[a] * m.k[b] * (m.c * std::cos(t) + m.s * std::sin(t));
  }
  return v;
}

double TrigPolynomial::partial(const std::vector<int>& axes, const std::array<double, 4>& x) const {
  double w = 2.0 * std::numbers::pi / period_, v = 0.0;
  int order = static_cast<int>(axes.size());
  for (const auto& m : modes_) {
    double t = phase(m, n_, w, x) + 0.5 * std::numbers::pi * order;
    double f = 1.0;
    for (int a : axes) f *= w * m.k[a];
    v += f * (m.c * std::cos(t) + m.s * std::sin(t));
  }
  return v;
}

cd TrigPolynomial::holomorphic_gradient(int j, const std::array<double, 4>& x) const {
  return 0.5 * cd(derivative(2 * j, x), -derivative(2 * j + 1, x));
}

HMat TrigPolynomial::mixed_hessian(const std::array<double, 4>& x) const {
  HMat h(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      int xi = 2 * i, yi = 2 * i + 1, xj = 2 * j, yj = 2 * j + 1;
      double re = derivative(xi, xj, x) + derivative(yi, yj, x);
      double im = derivative(xi, yj, x) - derivative(yi, xj, x);
      h(i, j) = 0.25 * cd(re, im);
    }
  return h;
}

HMat TrigPolynomial::holomorphic_hessian(const std::array<double, 4>& x) const {
  HMat h(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      int xi = 2 * i, yi = 2 * i + 1, xj = 2 * j, yj = 2 * j + 1;
      double re = derivative(xi, xj, x) - derivative(yi, yj, x);
      double im = -(derivative(xi, yj, x) + derivative(yi, xj, x));
      h(i, j) = 0.25 * cd(re, im);
    }
  return h;
}

ScalarField TrigPolynomial::sample(const TorusGrid& grid) const {
  if (grid.n() != n_) throw std::invalid_argument("grid dimension does not match polynomial");
  int rank = 2 * n_, N = grid.N();
  double w = 2.0 * std::numbers::pi / period_;
  std::vector<cd> acc(grid.size(), 0.0);
  // Row-major: the last axis varies fastest, so build the tensor product from axis 0 inwards.
  std::vector<std::vector<cd>> table(rank, std::vector<cd>(N));
  std::vector<cd> partial, next;
  for (const auto& m : modes_) {
    for (int a = 0; a < rank; ++a)
      for (int i = 0; i < N; ++i) table[a][i] = std::polar(1.0, w * m.k[a] * grid.spacing() * i);
    partial.assign(1, cd(m.c, -m.s));
    for (int a = 0; a < rank; ++a) {
      next.resize(partial.size() * N);
      for (std::size_t q = 0; q < partial.size(); ++q)
        for (int i = 0; i < N; ++i) next[q * N + i] = partial[q] * table[a][i];
      partial.swap(next);
    }
    for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += partial[p];
  }
  ScalarField f(grid);
  for (std::size_t p = 0; p < acc.size(); ++p) f[p] = acc[p].real();
  return f;
}

}  // namespace dlab
