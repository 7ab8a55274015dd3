#pragma once

#include <cstdint>
#include <vector>

#include "dlab/grid.hpp"
#include "dlab/hermitian.hpp"

namespace dlab {

// g = g0 + dd-bar u
HermitianMetricField metric_from_potential(const TorusGrid& grid, const HMat& g0, const ScalarField& u);
// chi_phi = chi + dd-bar phi; throws PositivityLost when chi_phi is not positive definite.
HermitianMetricField perturbed_metric(const HermitianMetricField& chi, const ScalarField& phi);
HermitianMetricField perturbed_metric_unchecked(const HermitianMetricField& chi, const ScalarField& phi);

// R_{i jbar k lbar} of a Kaehler metric, at(p,i,j,k,l).
class CurvatureField {
public:
  CurvatureField(const TorusGrid& grid, std::vector<cd> values);
  static CurvatureField flat(const TorusGrid& grid);

  const TorusGrid& grid() const { return grid_; }
  int n() const { return grid_.n(); }
  bool is_flat() const { return flat_; }
  cd at(std::size_t p, int i, int j, int k, int l) const {
    if (flat_) return 0.0;
    int n = grid_.n();
    return r_[(((p * n + i) * n + j) * n + k) * n + l];
  }
  double sup_abs() const;
  // max |R_{ijkl} - conj(R_{jilk})| / sup|R|
  double hermitian_defect() const;
  // max |R_{ijkl} - R_{kjil}| / sup|R|
  double kaehler_defect() const;

private:
  explicit CurvatureField(const TorusGrid& grid);

  TorusGrid grid_;
  std::vector<cd> r_;
  bool flat_;
};

CurvatureField curvature_tensor(const HermitianMetricField& g);

struct BisectionalBound {
  double K = 0.0;
  double min_ratio = 0.0;
  std::size_t argmin = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  bool exhaustive = false;
};

// K >= 0 with R(v, vbar, w, wbar) >= -K |v|^2 |w|^2 at the sampled pairs.
// For n = 2 each point draws sample_count directions v from its own
// generator and pairs each with the exactly minimizing w, so doubling
// sample_count only adds pairs and K is monotone in sample_count.
BisectionalBound bisectional_lower_bound(const CurvatureField& r, const HermitianMetricField& g,
                                         int sample_count = 64, std::uint64_t seed = 0);

// Per-point roots of det(A - rho B) = 0, ascending.
EigenvalueField generalized_eigenvalues(const HermitianMetricField& a, const HermitianMetricField& b);

}  // namespace dlab
