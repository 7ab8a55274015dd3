#include "dlab/trace_operator.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "dlab/error.hpp"

namespace dlab {

void remove_mean(std::vector<double>& v) {
  double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  for (auto& x : v) x -= m;
}

HMat TraceOperator::Coefficients::at(std::size_t p, int n) const {
  HMat m(n, n);
  m(0, 0) = a00[p];
  if (n == 2) {
    m(1, 1) = a11[p];
    m(1, 0) = cd(re10[p], im10[p]);
    m(0, 1) = cd(re10[p], -im10[p]);
  }
  return m;
}

TraceOperator::TraceOperator(const HermitianMetricField& omega, const HermitianMetricField& chi)
    : grid_(omega.grid()), sp_(Spectral::for_grid(omega.grid())), omega_(omega), chi_(chi) {
  require_same_grid(omega.grid(), chi.grid());
  if (omega.variance() != Variance::covariant || chi.variance() != Variance::covariant)
    throw std::invalid_argument("omega and chi must be covariant metrics");
  omega.require_positive("omega");
  chi.require_positive("chi");
  omega_c_ = split(omega.values());
  chi_c_ = split(chi.values());
}

TraceOperator::State TraceOperator::evaluate(const ScalarField& phi, bool with_h) const {
  require_same_grid(grid_, phi.grid());
  int n = grid_.n();
  std::size_t P = grid_.size();
  thread_local Spectrum hat;
  thread_local std::vector<double, FftwAllocator<double>> d00, d11, r01, i01;
  hat.resize(sp_.spectrum_size());
  sp_.forward(phi.values().data(), hat);
  d00.resize(P);
  sp_.apply(hat, sp_.mixed(0, 0, 0), d00.data());
  if (n == 2) {
    d11.resize(P), r01.resize(P), i01.resize(P);
    sp_.apply(hat, sp_.mixed(1, 1, 0), d11.data());
    sp_.apply(hat, sp_.mixed(0, 1, 0), r01.data());
    sp_.apply(hat, sp_.mixed(0, 1, 1), i01.data());
  }
  const auto& c = chi_c_;
  const auto& g = omega_c_;
  State s;
  s.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < P; ++p) {
    double e;
    if (n == 1) {
      e = c.a00[p] + d00[p];
    } else {
      // chi_phi = [[a, b], [conj b, d]] with b = conj of the stored (1,0) entry
      double a = c.a00[p] + d00[p], d = c.a11[p] + d11[p];
      double br = c.re10[p] + r01[p], bi = -c.im10[p] + i01[p];
      double nb = br * br + bi * bi;
      double mid = 0.5 * (a + d), h = 0.5 * (a - d), r = std::sqrt(h * h + nb);
      e = mid > 0 ? (a * d - nb) / (mid + r) : mid - r;
    }
    if (e < s.min_eigenvalue) s.min_eigenvalue = e, s.argmin = p;
  }
  s.positive = s.min_eigenvalue > positivity_floor;
  if (!s.positive) return s;
  s.trace.resize(P);
  if (with_h) {
    s.h.a00.resize(P);
    if (n == 2) s.h.a11.resize(P), s.h.re10.resize(P), s.h.im10.resize(P);
  }
  if (n == 1) {
    for (std::size_t p = 0; p < P; ++p) {
      double x = 1.0 / (c.a00[p] + d00[p]);
      s.trace[p] = x * g.a00[p];
      if (with_h) s.h.a00[p] = x * s.trace[p];
    }
    return s;
  }
  for (std::size_t p = 0; p < P; ++p) {
    // X = chi_phi^{-1} = [[d, -b], [-conj b, a]] / det
    double a = c.a00[p] + d00[p], d = c.a11[p] + d11[p];
    cd b(c.re10[p] + r01[p], -c.im10[p] + i01[p]);
    double inv = 1.0 / (a * d - std::norm(b));
    double xa = d * inv, xd = a * inv;
    cd xb = -b * inv;
    double ga = g.a00[p], gd = g.a11[p];
    cd gb(g.re10[p], -g.im10[p]);
    s.trace[p] = xa * ga + xd * gd + 2.0 * (xb * std::conj(gb)).real();
    if (with_h) {
      // Y = X G, H = Y X
      cd y00 = xa * ga + xb * std::conj(gb), y01 = xa * gb + xb * gd;
      cd y10 = std::conj(xb) * ga + xd * std::conj(gb), y11 = std::conj(xb) * gb + xd * gd;
      s.h.a00[p] = (y00 * xa + y01 * std::conj(xb)).real();
      s.h.a11[p] = (y10 * xb + y11 * xd).real();
      cd h10 = y10 * xa + y11 * std::conj(xb);
      s.h.re10[p] = h10.real();
      s.h.im10[p] = h10.imag();
    }
  }
  return s;
}

TraceOperator::Coefficients TraceOperator::split(const std::vector<HMat>& h) {
  std::size_t P = h.size();
  Coefficients c;
  c.a00.resize(P);
  for (std::size_t p = 0; p < P; ++p) c.a00[p] = h[p](0, 0).real();
  if (P > 0 && h[0].rows() == 2) {
    c.a11.resize(P), c.re10.resize(P), c.im10.resize(P);
    for (std::size_t p = 0; p < P; ++p) {
      c.a11[p] = h[p](1, 1).real();
      c.re10[p] = h[p](1, 0).real();
      c.im10[p] = h[p](1, 0).imag();
    }
  }
  return c;
}

std::vector<HMat> TraceOperator::join(const Coefficients& c, int n) {
  std::vector<HMat> h(c.size());
  for (std::size_t p = 0; p < h.size(); ++p) h[p] = c.at(p, n);
  return h;
}

void TraceOperator::laplacian(const Coefficients& c, const Spectrum& hat, double* out) const {
  std::size_t P = grid_.size();
  sp_.apply(hat, sp_.mixed(0, 0, 0), out);
  if (grid_.n() == 1) {
    for (std::size_t p = 0; p < P; ++p) out[p] *= c.a00[p];
    return;
  }
  thread_local std::vector<double, FftwAllocator<double>> d11, r01, i01;
  d11.resize(P), r01.resize(P), i01.resize(P);
  sp_.apply(hat, sp_.mixed(1, 1, 0), d11.data());
  sp_.apply(hat, sp_.mixed(0, 1, 0), r01.data());
  sp_.apply(hat, sp_.mixed(0, 1, 1), i01.data());
  // tr(M Phi) = M00 Phi00 + M11 Phi11 + 2 Re(M10 Phi01)
  for (std::size_t p = 0; p < P; ++p)
    out[p] = c.a00[p] * out[p] + c.a11[p] * d11[p] + 2.0 * (c.re10[p] * r01[p] - c.im10[p] * i01[p]);
}

void TraceOperator::laplacian(const Coefficients& c, const double* psi, double* out) const {
  laplacian(c, sp_.forward(psi), out);
}

HMat TraceOperator::average(const Coefficients& c) const {
  int n = grid_.n();
  HMat s = HMat::Zero(n, n);
  for (std::size_t p = 0; p < c.size(); ++p) s += c.at(p, n);
  return herm::symmetrize(s / static_cast<double>(c.size()));
}

TraceOperator::Preconditioner TraceOperator::preconditioner(const Coefficients& h) const {
  int n = grid_.n();
  std::size_t P = h.size();
  Preconditioner m;
  m.inv_a.resize(P);
  double s = 0.0;
  double s00 = 0.0, s11 = 0.0;
  cd s10 = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    double a = n == 1 ? h.a00[p] : 0.5 * (h.a00[p] + h.a11[p]);
    double ia = 1.0 / a;
    m.inv_a[p] = ia;
    s += ia;
    s00 += h.a00[p] * ia;
    if (n == 2) {
      s11 += h.a11[p] * ia;
      s10 += cd(h.re10[p], h.im10[p]) * ia;
    }
  }
  m.mean_inv_a = s / P;
  HMat shape(n, n);
  shape(0, 0) = s00 / P;
  if (n == 2) {
    shape(1, 1) = s11 / P;
    shape(1, 0) = s10 / static_cast<double>(P);
    shape(0, 1) = std::conj(shape(1, 0));
  }
  m.symbol = inverse_laplacian_symbol(shape);
  return m;
}

void TraceOperator::precondition(const Preconditioner& m, const double* y, Spectrum& z_hat) const {
  std::size_t P = grid_.size();
  thread_local std::vector<double, FftwAllocator<double>> w;
  w.resize(P);
  double s = 0.0;
  for (std::size_t p = 0; p < P; ++p) s += y[p] * m.inv_a[p];
  double c = s / P / m.mean_inv_a;
  for (std::size_t p = 0; p < P; ++p) w[p] = (y[p] - c) * m.inv_a[p];
  sp_.forward(w.data(), z_hat);
  for (std::size_t k = 0; k < z_hat.size(); ++k) z_hat[k] *= m.symbol[k];
}

std::vector<double> TraceOperator::inverse_laplacian_symbol(const HMat& hbar) const {
  auto s = sp_.laplacian_symbol(hbar);
  double floor = 0.25 * herm::min_eigenvalue(hbar) * std::pow(2.0 * std::numbers::pi / grid_.period(), 2);
  int rank = grid_.real_dims();
  std::vector<int> idx(rank, 0);
  for (std::size_t m = 0; m < s.size(); ++m) {
    double k2 = 0.0;
    for (int a = 0; a < rank; ++a) {
      double k = sp_.wavenumber(a, idx[a]);
      k2 += k * k;
    }
    if (k2 == 0.0)
      s[m] = 0.0;
    else
      s[m] = 1.0 / std::min(s[m], -floor * k2 * 0.5);
    for (int c = rank - 1; c >= 0; --c) {
      int len = c == rank - 1 ? grid_.N() / 2 + 1 : grid_.N();
      if (++idx[c] < len) break;
      idx[c] = 0;
    }
  }
  return s;
}

}  // namespace dlab
