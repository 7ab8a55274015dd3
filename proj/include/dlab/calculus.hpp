#pragma once

#include <utility>
#include <vector>

#include "dlab/grid.hpp"
#include "dlab/hermitian.hpp"

namespace dlab {

// v[p](k) = d phi / d z_k
struct ComplexCovectorField {
  TorusGrid grid;
  std::vector<CVec> v;
};

// mixed[p](i,j) = phi_{i jbar}; holomorphic[p](i,j) = phi_{ij}
struct ComplexHessianField {
  TorusGrid grid;
  std::vector<HMat> mixed;
  std::vector<HMat> holomorphic;
};

// d_k of a Hermitian matrix field: at(p,k)(i,j) = d_k M(i,j)
struct MatrixDerivativeField {
  TorusGrid grid;
  std::vector<HMat> d;
  const HMat& at(std::size_t p, int k) const { return d[p * grid.n() + k]; }
};

// d_k d_lbar of a Hermitian matrix field: at(p,k,l)(i,j) = d_k d_lbar M(i,j)
struct MatrixMixedDerivativeField {
  TorusGrid grid;
  std::vector<HMat> d;
  const HMat& at(std::size_t p, int k, int l) const { return d[(p * grid.n() + k) * grid.n() + l]; }
};

ComplexCovectorField complex_gradient(const ScalarField& phi);
ComplexHessianField complex_hessian(const ScalarField& phi, bool holomorphic_block = true);
std::pair<ComplexCovectorField, ComplexHessianField> complex_derivatives(const ScalarField& phi);

// tr_A dd-bar phi for a contravariant (inverse metric) field.
ScalarField laplacian_wrt(const HermitianMetricField& a_inv, const ScalarField& phi);
ScalarField gradient_norm_wrt(const HermitianMetricField& a_inv, const ScalarField& phi);
// Re(A^{i jbar} a_i conj(b_j))
ScalarField pairing_wrt(const HermitianMetricField& a_inv, const ComplexCovectorField& a,
                        const ComplexCovectorField& b);
double integrate_volume(const ScalarField& f, const HermitianMetricField& g);

MatrixDerivativeField holomorphic_derivative(const HermitianMetricField& m);
MatrixMixedDerivativeField mixed_derivative(const HermitianMetricField& m);

}  // namespace dlab
