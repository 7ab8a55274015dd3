#pragma once

#include <vector>

#include "dlab/grid.hpp"
#include "dlab/hermitian.hpp"
#include "dlab/spectral.hpp"

namespace dlab {

// Pointwise evaluation of phi -> tr_{chi_phi} omega and of its linearization
// psi -> -Delta_h psi, where h^{i jbar} = chi_phi^{i lbar} chi_phi^{k jbar} g_{k lbar}.
class TraceOperator {
public:
  // Entries M00, M11, Re M10, Im M10 of a contravariant 2x2 (or 1x1) field.
  struct Coefficients {
    std::vector<double> a00, a11, re10, im10;
    std::size_t size() const { return a00.size(); }
    HMat at(std::size_t p, int n) const;
  };

  struct State {
    bool positive = false;
    double min_eigenvalue = 0.0;
    std::size_t argmin = 0;
    std::vector<double> trace;  // tr_{chi_phi} omega
    Coefficients h;             // filled on request
  };

  // Approximate inverse of psi -> P Delta_h psi on mean-zero functions:
  // Delta_h = a(x) Delta_{h/a} with a = tr(h)/n, inverted as
  // Delta_{mean(h/a)}^{-1} ((y - c) / a) with c making (y - c)/a mean-free.
  struct Preconditioner {
    std::vector<double> inv_a;
    double mean_inv_a = 0.0;
    std::vector<double> symbol;
  };

  TraceOperator(const HermitianMetricField& omega, const HermitianMetricField& chi);

  const TorusGrid& grid() const { return grid_; }
  int n() const { return grid_.n(); }
  const Spectral& spectral() const { return sp_; }
  const HermitianMetricField& omega() const { return omega_; }
  const HermitianMetricField& chi() const { return chi_; }

  State evaluate(const ScalarField& phi, bool with_h) const;
  // out = Delta_h psi given the spectrum of psi
  void laplacian(const Coefficients& c, const Spectrum& psi_hat, double* out) const;
  void laplacian(const Coefficients& c, const double* psi, double* out) const;
  Preconditioner preconditioner(const Coefficients& h) const;
  void precondition(const Preconditioner& m, const double* y, Spectrum& z_hat) const;

  static Coefficients split(const std::vector<HMat>& h);
  static std::vector<HMat> join(const Coefficients& c, int n);
  HMat average(const Coefficients& c) const;
  // 1 / symbol of Delta_hbar, with the mean mode mapped to zero.
  std::vector<double> inverse_laplacian_symbol(const HMat& hbar) const;

private:
  TorusGrid grid_;
  const Spectral& sp_;
  HermitianMetricField omega_;
  HermitianMetricField chi_;
  Coefficients omega_c_, chi_c_;
};

void remove_mean(std::vector<double>& v);

}  // namespace dlab
