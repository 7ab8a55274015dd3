#include "dlab/calculus.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dlab/error.hpp"
#include "dlab/spectral.hpp"

namespace dlab {

namespace {

void require_contravariant(const HermitianMetricField& a) {
  if (a.variance() != Variance::contravariant)
    throw std::invalid_argument("expected a contravariant (inverse metric) field");
}

}  // namespace

ComplexCovectorField complex_gradient(const ScalarField& phi) {
  const auto& sp = Spectral::for_grid(phi.grid());
  int n = phi.grid().n();
  std::size_t P = phi.size();
  auto hat = sp.forward(phi);
  ComplexCovectorField g{phi.grid(), std::vector<CVec>(P, CVec::Zero(n))};
  std::vector<double> re(P), im(P);
  for (int k = 0; k < n; ++k) {
    sp.apply(hat, sp.grad(k, 0), re.data());
    sp.apply(hat, sp.grad(k, 1), im.data());
    for (std::size_t p = 0; p < P; ++p) g.v[p](k) = cd(re[p], im[p]);
  }
  return g;
}

ComplexHessianField complex_hessian(const ScalarField& phi, bool holomorphic_block) {
  const auto& sp = Spectral::for_grid(phi.grid());
  int n = phi.grid().n();
  std::size_t P = phi.size();
  auto hat = sp.forward(phi);
  ComplexHessianField h{phi.grid(), std::vector<HMat>(P, HMat::Zero(n, n)), {}};
  std::vector<double> re(P), im(P);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      sp.apply(hat, sp.mixed(i, j, 0), re.data());
      if (i != j) sp.apply(hat, sp.mixed(i, j, 1), im.data());
      for (std::size_t p = 0; p < P; ++p) {
        cd v(re[p], i != j ? im[p] : 0.0);
        h.mixed[p](i, j) = v;
        h.mixed[p](j, i) = std::conj(v);
      }
    }
  if (holomorphic_block) {
    h.holomorphic.assign(P, HMat::Zero(n, n));
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        sp.apply(hat, sp.holo(i, j, 0), re.data());
        sp.apply(hat, sp.holo(i, j, 1), im.data());
        for (std::size_t p = 0; p < P; ++p) {
          h.holomorphic[p](i, j) = cd(re[p], im[p]);
          h.holomorphic[p](j, i) = cd(re[p], im[p]);
        }
      }
  }
  return h;
}

std::pair<ComplexCovectorField, ComplexHessianField> complex_derivatives(const ScalarField& phi) {
  return {complex_gradient(phi), complex_hessian(phi)};
}

ScalarField laplacian_wrt(const HermitianMetricField& a_inv, const ScalarField& phi) {
  require_contravariant(a_inv);
  require_same_grid(a_inv.grid(), phi.grid());
  auto h = complex_hessian(phi, false);
  ScalarField out(phi.grid());
  for (std::size_t p = 0; p < phi.size(); ++p) {
    cd t = (a_inv[p] * h.mixed[p]).trace();
    double scale = std::abs(t) + 1.0;
    if (std::abs(t.imag()) > 1e-8 * scale)
      throw NonRealResult("Laplacian has imaginary part " + std::to_string(t.imag()) + " at point " +
                          std::to_string(p));
    out[p] = t.real();
  }
  return out;
}

ScalarField gradient_norm_wrt(const HermitianMetricField& a_inv, const ScalarField& phi) {
  require_contravariant(a_inv);
  require_same_grid(a_inv.grid(), phi.grid());
  auto g = complex_gradient(phi);
  ScalarField out(phi.grid());
  for (std::size_t p = 0; p < phi.size(); ++p) out[p] = herm::quad(a_inv[p], g.v[p]);
  return out;
}

ScalarField pairing_wrt(const HermitianMetricField& a_inv, const ComplexCovectorField& a,
                        const ComplexCovectorField& b) {
  require_contravariant(a_inv);
  require_same_grid(a_inv.grid(), a.grid);
  require_same_grid(a_inv.grid(), b.grid);
  ScalarField out(a.grid);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = herm::form(a_inv[p], b.v[p], a.v[p]).real();
  return out;
}

double integrate_volume(const ScalarField& f, const HermitianMetricField& g) {
  require_same_grid(f.grid(), g.grid());
  double s = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) s += f[p] * herm::det(g[p]);
  return s * f.grid().cell_volume();
}

MatrixDerivativeField holomorphic_derivative(const HermitianMetricField& m) {
  const auto& grid = m.grid();
  const auto& sp = Spectral::for_grid(grid);
  int n = grid.n();
  std::size_t P = grid.size();
  MatrixDerivativeField out{grid, std::vector<HMat>(P * n, HMat::Zero(n, n))};
  std::vector<double> a(P), b(P), c(P), d(P);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto hr = sp.forward(m.component(i, j, 0));
      auto hi = sp.forward(m.component(i, j, 1));
      for (int k = 0; k < n; ++k) {
        // d_k (R + iI) = d_k R + i d_k I, each d_k of a real field being complex
        sp.apply(hr, sp.grad(k, 0), a.data());
        sp.apply(hr, sp.grad(k, 1), b.data());
        sp.apply(hi, sp.grad(k, 0), c.data());
        sp.apply(hi, sp.grad(k, 1), d.data());
        for (std::size_t p = 0; p < P; ++p) out.d[p * n + k](i, j) = cd(a[p] - d[p], b[p] + c[p]);
      }
    }
  return out;
}

MatrixMixedDerivativeField mixed_derivative(const HermitianMetricField& m) {
  const auto& grid = m.grid();
  const auto& sp = Spectral::for_grid(grid);
  int n = grid.n();
  std::size_t P = grid.size();
  MatrixMixedDerivativeField out{grid, std::vector<HMat>(P * n * n, HMat::Zero(n, n))};
  std::vector<double> a(P), b(P), c(P), d(P);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto hr = sp.forward(m.component(i, j, 0));
      auto hi = sp.forward(m.component(i, j, 1));
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          sp.apply(hr, sp.mixed(k, l, 0), a.data());
          sp.apply(hr, sp.mixed(k, l, 1), b.data());
          sp.apply(hi, sp.mixed(k, l, 0), c.data());
          sp.apply(hi, sp.mixed(k, l, 1), d.data());
          for (std::size_t p = 0; p < P; ++p) out.d[(p * n + k) * n + l](i, j) = cd(a[p] - d[p], b[p] + c[p]);
        }
    }
  return out;
}

}  // namespace dlab
