#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dlab {

// Uniform periodic grid on the flat torus C^n / (period * (Z + iZ))^n.
// Real axes are ordered x1, y1, x2, y2; the last axis varies fastest.
class TorusGrid {
public:
  TorusGrid(int n, int N, double period = 1.0);

  int n() const { return n_; }
  int N() const { return N_; }
  double period() const { return period_; }
  int real_dims() const { return 2 * n_; }
  std::size_t size() const { return size_; }
  double spacing() const { return period_ / N_; }
  double cell_volume() const;

  std::array<int, 4> multi_index(std::size_t p) const;
  std::size_t flat_index(std::span<const int> idx) const;
  std::array<double, 4> coords(std::size_t p) const;

  bool operator==(const TorusGrid&) const = default;

private:
  int n_;
  int N_;
  double period_;
  std::size_t size_;
};

void require_same_grid(const TorusGrid& a, const TorusGrid& b);

class ScalarField {
public:
  explicit ScalarField(const TorusGrid& grid, double value = 0.0);
  ScalarField(const TorusGrid& grid, std::vector<double> values);

  template <class Fn>
  static ScalarField sample(const TorusGrid& grid, Fn&& fn) {
    ScalarField f(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) f.v_[p] = fn(grid.coords(p));
    return f;
  }

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t p) { return v_[p]; }
  double operator[](std::size_t p) const { return v_[p]; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  double min() const;
  double max() const;
  double sup_abs() const;
  double mean() const;
  std::size_t argmin() const;
  std::size_t argmax() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  ScalarField& operator+=(double s);

private:
  TorusGrid grid_;
  std::vector<double> v_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

}  // namespace dlab
