#include "dlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dlab/error.hpp"

namespace dlab {

TorusGrid::TorusGrid(int n, int N, double period) : n_(n), N_(N), period_(period) {
  if (n != 1 && n != 2) throw UnsupportedDimension("complex dimension must be 1 or 2, got " + std::to_string(n));
  if (N < 8 || (N & (N - 1)) != 0) throw std::invalid_argument("grid size must be a power of two >= 8");
  if (!(period > 0.0) || !std::isfinite(period)) throw std::invalid_argument("period must be positive");
  size_ = 1;
  for (int a = 0; a < 2 * n; ++a) size_ *= static_cast<std::size_t>(N);
}

double TorusGrid::cell_volume() const { return std::pow(spacing(), 2 * n_); }

std::array<int, 4> TorusGrid::multi_index(std::size_t p) const {
  std::array<int, 4> idx{0, 0, 0, 0};
  for (int a = real_dims() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(p % N_);
    p /= N_;
  }
  return idx;
}

std::size_t TorusGrid::flat_index(std::span<const int> idx) const {
  std::size_t p = 0;
  for (int a = 0; a < real_dims(); ++a) {
    int i = ((idx[a] % N_) + N_) % N_;
    p = p * N_ + i;
  }
  return p;
}

std::array<double, 4> TorusGrid::coords(std::size_t p) const {
  auto idx = multi_index(p);
  std::array<double, 4> x{0, 0, 0, 0};
  for (int a = 0; a < real_dims(); ++a) x[a] = idx[a] * spacing();
  return x;
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b) {
  if (!(a == b)) throw GridMismatch("fields live on different grids");
}

ScalarField::ScalarField(const TorusGrid& grid, double value) : grid_(grid), v_(grid.size(), value) {}

ScalarField::ScalarField(const TorusGrid& grid, std::vector<double> values) : grid_(grid), v_(std::move(values)) {
  if (v_.size() != grid.size()) throw GridMismatch("value count does not match grid");
  for (double x : v_)
    if (!std::isfinite(x)) throw std::invalid_argument("scalar field has non-finite entries");
}

double ScalarField::min() const { return *std::min_element(v_.begin(), v_.end()); }
double ScalarField::max() const { return *std::max_element(v_.begin(), v_.end()); }
double ScalarField::sup_abs() const {
  double s = 0.0;
  for (double x : v_) s = std::max(s, std::abs(x));
  return s;
}
double ScalarField::mean() const { return std::accumulate(v_.begin(), v_.end(), 0.0) / v_.size(); }
std::size_t ScalarField::argmin() const { return std::min_element(v_.begin(), v_.end()) - v_.begin(); }
std::size_t ScalarField::argmax() const { return std::max_element(v_.begin(), v_.end()) - v_.begin(); }

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t p = 0; p < v_.size(); ++p) v_[p] += o.v_[p];
  return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t p = 0; p < v_.size(); ++p) v_[p] -= o.v_[p];
  return *this;
}
ScalarField& ScalarField::operator*=(double s) {
  for (double& x : v_) x *= s;
  return *this;
}
ScalarField& ScalarField::operator+=(double s) {
  for (double& x : v_) x += s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

}  // namespace dlab
