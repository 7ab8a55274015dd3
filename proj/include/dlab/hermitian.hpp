#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

#include "dlab/grid.hpp"

namespace dlab {

using cd = std::complex<double>;
using HMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 2, 2>;
using CVec = Eigen::Matrix<cd, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;

// Closed-form linear algebra for the 1x1 and 2x2 Hermitian blocks that
// appear at every grid point.
namespace herm {

double trace(const HMat& a);
double det(const HMat& a);
HMat inverse(const HMat& a);
// Re tr(A B)
double trace_product(const HMat& a, const HMat& b);
// Eigenvalues, ascending.
RVec eigenvalues(const HMat& a);
double min_eigenvalue(const HMat& a);
double max_eigenvalue(const HMat& a);
// Roots of det(A - rho B) = 0 for B positive definite, ascending.
RVec generalized_eigenvalues(const HMat& a, const HMat& b);
double condition_number(const HMat& a);
double hermitian_defect(const HMat& a);
HMat symmetrize(const HMat& a);
// v^H M w
cd form(const HMat& m, const CVec& v, const CVec& w);
double quad(const HMat& m, const CVec& v);
HMat identity(int n);
HMat mean(const std::vector<HMat>& m);

}  // namespace herm

enum class Variance { covariant, contravariant };

// A Hermitian n x n matrix per grid point. Covariant fields store
// M(i,j) = A_{i jbar}; contravariant fields store M with T^{i jbar} = M(j,i),
// so raising a covariant field is a plain matrix inverse and the full
// contraction T^{i jbar} S_{i jbar} is tr(M S).
class HermitianMetricField {
public:
  HermitianMetricField(const TorusGrid& grid, Variance variance, std::vector<HMat> values);
  static HermitianMetricField constant(const TorusGrid& grid, const HMat& value,
                                       Variance variance = Variance::covariant);

  const TorusGrid& grid() const { return grid_; }
  int n() const { return grid_.n(); }
  Variance variance() const { return variance_; }
  std::size_t size() const { return m_.size(); }
  const HMat& operator[](std::size_t p) const { return m_[p]; }
  const std::vector<HMat>& values() const { return m_; }
  bool is_constant() const { return constant_; }

  double min_eigenvalue() const;
  std::size_t argmin_eigenvalue() const;
  void require_positive(const char* what) const;
  HermitianMetricField inverse() const;
  // Real (i,j) component field: part 0 = real, 1 = imaginary.
  ScalarField component(int i, int j, int part) const;

private:
  TorusGrid grid_;
  Variance variance_;
  std::vector<HMat> m_;
  bool constant_ = false;
};

// Entry-wise generalized eigenvalues of (A, B), ascending per point.
struct EigenvalueField {
  TorusGrid grid;
  int n;
  std::vector<double> values;  // index p * n + r
  double at(std::size_t p, int r) const { return values[p * n + r]; }
  double min() const;
  double max() const;
};

}  // namespace dlab
