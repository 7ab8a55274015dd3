#include "dlab/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dlab/error.hpp"

namespace dlab {
namespace herm {

double trace(const HMat& a) {
  double t = 0.0;
  for (int i = 0; i < a.rows(); ++i) t += a(i, i).real();
  return t;
}

double det(const HMat& a) {
  if (a.rows() == 1) return a(0, 0).real();
  return a(0, 0).real() * a(1, 1).real() - std::norm(a(0, 1));
}

HMat inverse(const HMat& a) {
  HMat r(a.rows(), a.cols());
  if (a.rows() == 1) {
    r(0, 0) = 1.0 / a(0, 0).real();
    return r;
  }
  double d = det(a);
  r(0, 0) = a(1, 1).real() / d;
  r(1, 1) = a(0, 0).real() / d;
  r(0, 1) = -a(0, 1) / d;
  r(1, 0) = std::conj(r(0, 1));
  return r;
}

double trace_product(const HMat& a, const HMat& b) {
  double t = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t += (a(i, j) * b(j, i)).real();
  return t;
}

RVec eigenvalues(const HMat& a) {
  RVec e(a.rows());
  if (a.rows() == 1) {
    e(0) = a(0, 0).real();
    return e;
  }
  double p = a(0, 0).real(), q = a(1, 1).real();
  double mid = 0.5 * (p + q);
  double r = std::hypot(0.5 * (p - q), std::abs(a(0, 1)));
  double hi = mid >= 0 ? mid + r : mid - r;
  double lo = hi != 0.0 ? det(a) / hi : 0.0;
  e(0) = std::min(lo, hi);
  e(1) = std::max(lo, hi);
  return e;
}

double min_eigenvalue(const HMat& a) { return eigenvalues(a)(0); }
double max_eigenvalue(const HMat& a) { return eigenvalues(a)(a.rows() - 1); }

RVec generalized_eigenvalues(const HMat& a, const HMat& b) {
  int n = static_cast<int>(a.rows());
  if (n == 1) {
    RVec e(1);
    if (!(b(0, 0).real() > 0.0)) throw SingularMetric("reference matrix is not positive definite");
    e(0) = a(0, 0).real() / b(0, 0).real();
    return e;
  }
  if (condition_number(b) > singular_condition) throw SingularMetric("reference matrix is singular or not positive definite");
  // B = L L^H, C = L^{-1} A L^{-H}
  double l11 = std::sqrt(b(0, 0).real());
  cd l21 = b(1, 0) / l11;
  double l22 = std::sqrt(b(1, 1).real() - std::norm(l21));
  HMat linv(2, 2);
  linv(0, 0) = 1.0 / l11;
  linv(0, 1) = 0.0;
  linv(1, 1) = 1.0 / l22;
  linv(1, 0) = -l21 / (l11 * l22);
  HMat c = linv * a * linv.adjoint();
  return eigenvalues(symmetrize(c));
}

double condition_number(const HMat& a) {
  RVec e = eigenvalues(a);
  if (!(e(0) > 0.0)) return std::numeric_limits<double>::infinity();
  return e(e.size() - 1) / e(0);
}

double hermitian_defect(const HMat& a) {
  double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
}

HMat symmetrize(const HMat& a) {
  HMat s = 0.5 * (a + a.adjoint());
  for (int i = 0; i < s.rows(); ++i) s(i, i) = s(i, i).real();
  return s;
}

cd form(const HMat& m, const CVec& v, const CVec& w) { return (v.adjoint() * m * w)(0, 0); }
double quad(const HMat& m, const CVec& v) { return form(m, v, v).real(); }

HMat identity(int n) { return HMat::Identity(n, n); }

HMat mean(const std::vector<HMat>& m) {
  HMat s = HMat::Zero(m.front().rows(), m.front().cols());
  for (const auto& x : m) s += x;
  return symmetrize(s / static_cast<double>(m.size()));
}

}  // namespace herm

HermitianMetricField::HermitianMetricField(const TorusGrid& grid, Variance variance, std::vector<HMat> values)
    : grid_(grid), variance_(variance), m_(std::move(values)) {
  if (m_.size() != grid.size()) throw GridMismatch("matrix count does not match grid");
  for (auto& m : m_) {
    if (m.rows() != grid.n() || m.cols() != grid.n()) throw std::invalid_argument("matrix shape does not match dimension");
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j)
        if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
          throw std::invalid_argument("metric field has non-finite entries");
    if (herm::hermitian_defect(m) > 1e-12) throw std::invalid_argument("matrix field is not Hermitian");
    m = herm::symmetrize(m);
  }
  constant_ = std::all_of(m_.begin(), m_.end(), [&](const HMat& m) { return m == m_.front(); });
}

HermitianMetricField HermitianMetricField::constant(const TorusGrid& grid, const HMat& value, Variance variance) {
  return HermitianMetricField(grid, variance, std::vector<HMat>(grid.size(), value));
}

double HermitianMetricField::min_eigenvalue() const { return herm::min_eigenvalue(m_[argmin_eigenvalue()]); }

std::size_t HermitianMetricField::argmin_eigenvalue() const {
  std::size_t best = 0;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < m_.size(); ++p) {
    double e = herm::min_eigenvalue(m_[p]);
    if (e < lo) lo = e, best = p;
  }
  return best;
}

void HermitianMetricField::require_positive(const char* what) const {
  std::size_t p = argmin_eigenvalue();
  double e = herm::min_eigenvalue(m_[p]);
  if (!(e > positivity_floor))
    throw PositivityLost(std::string(what) + " is not positive definite (min eigenvalue " + std::to_string(e) +
                         " at point " + std::to_string(p) + ")");
}

HermitianMetricField HermitianMetricField::inverse() const {
  std::vector<HMat> inv(m_.size());
  for (std::size_t p = 0; p < m_.size(); ++p) {
    if (herm::condition_number(m_[p]) > singular_condition)
      throw SingularMetric("metric is singular at point " + std::to_string(p));
    inv[p] = herm::inverse(m_[p]);
  }
  return HermitianMetricField(grid_, variance_ == Variance::covariant ? Variance::contravariant : Variance::covariant,
                              std::move(inv));
}

ScalarField HermitianMetricField::component(int i, int j, int part) const {
  ScalarField f(grid_);
  for (std::size_t p = 0; p < m_.size(); ++p) f[p] = part == 0 ? m_[p](i, j).real() : m_[p](i, j).imag();
  return f;
}

double EigenvalueField::min() const { return *std::min_element(values.begin(), values.end()); }
double EigenvalueField::max() const { return *std::max_element(values.begin(), values.end()); }

}  // namespace dlab
