#include "dlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "dlab/calculus.hpp"
#include "dlab/error.hpp"
#include "dlab/fields.hpp"

namespace dlab {

HermitianMetricField metric_from_potential(const TorusGrid& grid, const HMat& g0, const ScalarField& u) {
  require_same_grid(grid, u.grid());
  if (g0.rows() != grid.n() || g0.cols() != grid.n()) throw std::invalid_argument("reference metric has wrong shape");
  if (herm::hermitian_defect(g0) > 1e-12) throw std::invalid_argument("reference metric is not Hermitian");
  if (!(herm::min_eigenvalue(g0) > positivity_floor)) throw PositivityLost("reference metric is not positive definite");
  auto h = complex_hessian(u, false);
  std::vector<HMat> m(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) m[p] = g0 + h.mixed[p];
  HermitianMetricField g(grid, Variance::covariant, std::move(m));
  g.require_positive("metric g0 + dd-bar u");
  return g;
}

HermitianMetricField perturbed_metric_unchecked(const HermitianMetricField& chi, const ScalarField& phi) {
  require_same_grid(chi.grid(), phi.grid());
  auto h = complex_hessian(phi, false);
  std::vector<HMat> m(chi.size());
  for (std::size_t p = 0; p < chi.size(); ++p) m[p] = chi[p] + h.mixed[p];
  return HermitianMetricField(chi.grid(), Variance::covariant, std::move(m));
}

HermitianMetricField perturbed_metric(const HermitianMetricField& chi, const ScalarField& phi) {
  auto m = perturbed_metric_unchecked(chi, phi);
  m.require_positive("chi_phi");
  return m;
}

CurvatureField::CurvatureField(const TorusGrid& grid, std::vector<cd> values)
    : grid_(grid), r_(std::move(values)), flat_(false) {
  std::size_t n = grid.n();
  if (r_.size() != grid.size() * n * n * n * n) throw GridMismatch("curvature storage does not match grid");
}

CurvatureField::CurvatureField(const TorusGrid& grid) : grid_(grid), flat_(true) {}

CurvatureField CurvatureField::flat(const TorusGrid& grid) { return CurvatureField(grid); }

double CurvatureField::sup_abs() const {
  double s = 0.0;
  for (auto v : r_) s = std::max(s, std::abs(v));
  return s;
}

double CurvatureField::hermitian_defect() const {
  if (flat_) return 0.0;
  double sup = sup_abs(), d = 0.0;
  int n = grid_.n();
  for (std::size_t p = 0; p < grid_.size(); ++p)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) d = std::max(d, std::abs(at(p, i, j, k, l) - std::conj(at(p, j, i, l, k))));
  return sup > 0 ? d / sup : d;
}

double CurvatureField::kaehler_defect() const {
  if (flat_) return 0.0;
  double sup = sup_abs(), d = 0.0;
  int n = grid_.n();
  for (std::size_t p = 0; p < grid_.size(); ++p)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) d = std::max(d, std::abs(at(p, i, j, k, l) - at(p, k, j, i, l)));
  return sup > 0 ? d / sup : d;
}

CurvatureField curvature_tensor(const HermitianMetricField& g) {
  const auto& grid = g.grid();
  if (g.variance() != Variance::covariant) throw std::invalid_argument("curvature needs a covariant metric");
  g.require_positive("metric");
  if (g.is_constant()) return CurvatureField::flat(grid);
  int n = grid.n();
  auto d1 = holomorphic_derivative(g);
  auto d2 = mixed_derivative(g);
  std::vector<cd> r(grid.size() * n * n * n * n);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    HMat inv = herm::inverse(g[p]);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            cd v = -d2.at(p, k, l)(i, j);
            // g^{p qbar} d_k g_{i qbar} d_lbar g_{p jbar}, with d_lbar g_{p jbar} = conj(d_l g_{j pbar})
            for (int a = 0; a < n; ++a)
              for (int b = 0; b < n; ++b) v += inv(b, a) * d1.at(p, k)(i, b) * std::conj(d1.at(p, l)(j, a));
            r[(((p * n + i) * n + j) * n + k) * n + l] = v;
          }
  }
  return CurvatureField(grid, std::move(r));
}

namespace {

double bisectional_ratio(const CurvatureField& r, std::size_t p, const HMat& g, const CVec& v, const CVec& w) {
  int n = r.n();
  cd s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cd vij = v(i) * std::conj(v(j));
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) s += r.at(p, i, j, k, l) * vij * w(k) * std::conj(w(l));
    }
  // |v|^2 = g_{i jbar} v^i conj(v^j)
  return s.real() / (herm::quad(g, v.conjugate()) * herm::quad(g, w.conjugate()));
}

// min over w of R(v, vbar, w, wbar) / (|v|^2 |w|^2) for n = 2: with u = conj(w)
// the quotient is u^H A u / u^H G u, A(k,l) = R_{i jbar k lbar} v^i conj(v^j).
double bisectional_min_over_w(const cd* rp, const HMat& g, double gv, cd v0, cd v1) {
  cd vv[2][2] = {{v0 * std::conj(v0), v0 * std::conj(v1)}, {v1 * std::conj(v0), v1 * std::conj(v1)}};
  cd a[2][2] = {};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) a[k][l] += rp[((i * 2 + j) * 2 + k) * 2 + l] * vv[i][j];
  // det(A - rho G) = 0
  double a00 = a[0][0].real(), a11 = a[1][1].real();
  double g00 = g(0, 0).real(), g11 = g(1, 1).real();
  cd a01 = a[0][1], g01 = g(0, 1);
  double qa = g00 * g11 - std::norm(g01);
  double qb = a00 * g11 + a11 * g00 - 2.0 * (a01 * std::conj(g01)).real();
  double qc = a00 * a11 - std::norm(a01);
  double disc = std::sqrt(std::max(qb * qb - 4.0 * qa * qc, 0.0));
  double rho = qb >= 0.0 ? 2.0 * qc / (qb + disc) : (qb - disc) / (2.0 * qa);
  if (qb >= 0.0 && qb + disc == 0.0) rho = 0.0;
  return rho / gv;
}

}  // namespace

BisectionalBound bisectional_lower_bound(const CurvatureField& r, const HermitianMetricField& g, int sample_count,
                                         std::uint64_t seed) {
  require_same_grid(r.grid(), g.grid());
  if (sample_count < 0) throw std::invalid_argument("sample_count must be non-negative");
  BisectionalBound out;
  out.seed = seed;
  int n = r.n();
  out.exhaustive = n == 1;
  out.samples = n == 1 ? 1 : sample_count;
  if (r.is_flat()) return out;

  double lo = std::numeric_limits<double>::infinity();
  std::vector<CVec> axes;
  for (int a = 0; a < n; ++a) axes.push_back(CVec::Unit(n, a));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<cd> rp(16);
  for (std::size_t p = 0; p < r.grid().size(); ++p) {
    auto consider = [&](double x) {
      if (x < lo) lo = x, out.argmin = p;
    };
    for (const auto& v : axes)
      for (const auto& w : axes) consider(bisectional_ratio(r, p, g[p], v, w));
    if (n == 1) continue;
    for (int q = 0; q < 16; ++q) rp[q] = r.at(p, q >> 3, (q >> 2) & 1, (q >> 1) & 1, q & 1);
    // Directions v uniform on CP^1; the w direction is minimized exactly.
    std::mt19937_64 rng(derive_seed(seed, p));
    for (int s = 0; s < sample_count; ++s) {
      double c = 2.0 * unit(rng) - 1.0, psi = 2.0 * std::numbers::pi * unit(rng);
      cd v0(std::sqrt(0.5 * (1.0 + c)), 0.0);
      cd v1 = std::polar(std::sqrt(0.5 * (1.0 - c)), psi);
      const HMat& gp = g[p];
      double gv = gp(0, 0).real() * std::norm(v0) + gp(1, 1).real() * std::norm(v1) +
                  2.0 * (v0 * gp(0, 1) * std::conj(v1)).real();
      consider(bisectional_min_over_w(rp.data(), gp, gv, v0, v1));
    }
  }
  out.min_ratio = lo;
  out.K = std::max(0.0, -lo);
  return out;
}

EigenvalueField generalized_eigenvalues(const HermitianMetricField& a, const HermitianMetricField& b) {
  require_same_grid(a.grid(), b.grid());
  int n = a.n();
  EigenvalueField e{a.grid(), n, std::vector<double>(a.size() * n)};
  for (std::size_t p = 0; p < a.size(); ++p) {
    RVec ev = herm::generalized_eigenvalues(a[p], b[p]);
    for (int r = 0; r < n; ++r) e.values[p * n + r] = ev(r);
  }
  return e;
}

}  // namespace dlab
