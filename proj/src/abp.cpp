#include "dlab/abp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "dlab/error.hpp"

namespace dlab {

BoxDomain BoxDomain::cube(int d, double lo, double hi, int M_pts) {
  BoxDomain b{d, std::vector<double>(d, lo), std::vector<double>(d, hi), M_pts};
  b.validate();
  return b;
}

void BoxDomain::validate() const {
  if (d < 1 || d > 4) throw std::invalid_argument("box dimension must be 1..4");
  if (M_pts < 8) throw std::invalid_argument("box needs at least 8 points per axis");
  if (static_cast<int>(lower.size()) != d || static_cast<int>(upper.size()) != d)
    throw std::invalid_argument("box bounds do not match the dimension");
  for (int a = 0; a < d; ++a)
    if (!(upper[a] > lower[a])) throw std::invalid_argument("box bounds must be increasing");
}

double BoxDomain::diam() const {
  double s = 0.0;
  for (int a = 0; a < d; ++a) s += (upper[a] - lower[a]) * (upper[a] - lower[a]);
  return std::sqrt(s);
}

double BoxDomain::spacing(int axis) const { return (upper[axis] - lower[axis]) / (M_pts - 1); }

double BoxDomain::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < d; ++a) v *= spacing(a);
  return v;
}

std::size_t BoxDomain::size() const {
  std::size_t s = 1;
  for (int a = 0; a < d; ++a) s *= M_pts;
  return s;
}

std::vector<int> BoxDomain::multi_index(std::size_t p) const {
  std::vector<int> idx(d);
  for (int a = d - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(p % M_pts);
    p /= M_pts;
  }
  return idx;
}

std::size_t BoxDomain::flat_index(const std::vector<int>& idx) const {
  std::size_t p = 0;
  for (int a = 0; a < d; ++a) p = p * M_pts + idx[a];
  return p;
}

std::vector<double> BoxDomain::point(std::size_t p) const {
  auto idx = multi_index(p);
  std::vector<double> x(d);
  for (int a = 0; a < d; ++a) x[a] = lower[a] + idx[a] * spacing(a);
  return x;
}

bool BoxDomain::on_boundary(std::size_t p) const {
  for (int a = d - 1; a >= 0; --a) {
    int i = static_cast<int>(p % M_pts);
    if (i == 0 || i == M_pts - 1) return true;
    p /= M_pts;
  }
  return false;
}

double unit_ball_volume(int d) { return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

namespace {

using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

std::size_t stride(const BoxDomain& dom, int axis) {
  std::size_t s = 1;
  for (int a = axis + 1; a < dom.d; ++a) s *= dom.M_pts;
  return s;
}

// Central differences at an interior point.
SmallVec gradient_at(const double* u, const BoxDomain& dom, std::size_t p) {
  SmallVec g(dom.d);
  for (int a = 0; a < dom.d; ++a) {
    std::size_t s = stride(dom, a);
    g[a] = (u[p + s] - u[p - s]) / (2.0 * dom.spacing(a));
  }
  return g;
}

SmallMat hessian_at(const double* u, const BoxDomain& dom, std::size_t p) {
  SmallMat H(dom.d, dom.d);
  for (int a = 0; a < dom.d; ++a) {
    std::size_t sa = stride(dom, a);
    double ha = dom.spacing(a);
    H(a, a) = (u[p + sa] - 2.0 * u[p] + u[p - sa]) / (ha * ha);
    for (int b = a + 1; b < dom.d; ++b) {
      std::size_t sb = stride(dom, b);
      double v = (u[p + sa + sb] - u[p + sa - sb] - u[p - sa + sb] + u[p - sa - sb]) / (4.0 * ha * dom.spacing(b));
      H(a, b) = H(b, a) = v;
    }
  }
  return H;
}

const Eigen::MatrixXd& matrix_at(const MatrixField& a, std::size_t p) { return a.size() == 1 ? a[0] : a[p]; }

void check_matrix_field(const MatrixField& a, std::size_t size, int d) {
  if (a.size() != 1 && a.size() != size) throw std::invalid_argument("matrix field has the wrong number of points");
  for (const auto& m : a) {
    if (m.rows() != d || m.cols() != d) throw std::invalid_argument("matrix field has the wrong dimension");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()[0] < -1e-12 * (1.0 + m.norm())) throw PrereqViolated("coefficient matrix is not semidefinite");
  }
}

double boundary_sup(const std::vector<double>& u, const BoxDomain& dom) {
  double s = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < dom.size(); ++p)
    if (dom.on_boundary(p)) s = std::max(s, u[p]);
  return s;
}

bool supporting_plane(const std::vector<double>& u, const std::vector<double>& coords, int d, std::size_t x,
                      const SmallVec& g, double tol) {
  const double* cx = &coords[x * d];
  for (std::size_t y = 0; y < u.size(); ++y) {
    const double* cy = &coords[y * d];
    double plane = u[x];
    for (int a = 0; a < d; ++a) plane += g[a] * (cy[a] - cx[a]);
    if (u[y] > plane + tol) return false;
  }
  return true;
}

double plane_tolerance(const std::vector<double>& u) {
  double s = 0.0;
  for (double v : u) s = std::max(s, std::abs(v));
  return 1e-12 * (1.0 + s);
}

std::vector<double> coordinates(const BoxDomain& dom) {
  std::vector<double> c(dom.size() * dom.d);
  for (std::size_t p = 0; p < dom.size(); ++p) {
    auto x = dom.point(p);
    std::copy(x.begin(), x.end(), c.begin() + p * dom.d);
  }
  return c;
}

}  // namespace

ContactSet upper_contact_set(const std::vector<double>& u, const BoxDomain& dom) {
  dom.validate();
  if (u.size() != dom.size()) throw std::invalid_argument("grid function does not match the box");
  ContactSet set;
  set.mask.assign(u.size(), 0);
  set.U = *std::max_element(u.begin(), u.end()) - boundary_sup(u, dom);
  set.U_nonpositive = set.U <= 0.0;
  set.gradient_cap = set.U / (3.0 * dom.diam());
  auto coords = coordinates(dom);
  double tol = plane_tolerance(u);
  for (std::size_t p = 0; p < u.size(); ++p) {
    if (dom.on_boundary(p)) continue;
    auto g = gradient_at(u.data(), dom, p);
    if (g.norm() > set.gradient_cap) continue;
    if (supporting_plane(u, coords, dom.d, p, g, tol)) {
      set.mask[p] = 1;
      ++set.count;
    }
  }
  return set;
}

bool verify_contact_set(const std::vector<double>& u, const BoxDomain& dom, const ContactSet& set) {
  double tol = plane_tolerance(u);
  for (std::size_t x = 0; x < u.size(); ++x) {
    if (!set.mask[x]) continue;
    if (dom.on_boundary(x)) return false;
    auto g = gradient_at(u.data(), dom, x);
    if (g.norm() > set.gradient_cap) return false;
    auto ix = dom.multi_index(x);
    std::vector<int> iy(dom.d, 0);
    for (std::size_t y = 0; y < u.size(); ++y) {
      double plane = u[x];
      for (int a = 0; a < dom.d; ++a) plane += g[a] * (iy[a] - ix[a]) * dom.spacing(a);
      if (u[y] > plane + tol) return false;
      for (int a = dom.d - 1; a >= 0 && ++iy[a] == dom.M_pts; --a) iy[a] = 0;
    }
  }
  return true;
}

double contact_integral(const std::vector<double>& u, const BoxDomain& dom, const std::vector<char>& mask,
                        std::size_t* clipped) {
  double cell = dom.cell_volume(), sum = 0.0;
  std::size_t negative = 0;
  for (std::size_t p = 0; p < u.size(); ++p) {
    if (!mask[p] || dom.on_boundary(p)) continue;
    double det = (-hessian_at(u.data(), dom, p)).determinant();
    if (det < 0.0) {
      ++negative;
      continue;
    }
    sum += det * cell;
  }
  if (clipped) *clipped = negative;
  return sum;
}

EllipticABP abp_elliptic_check(const std::vector<double>& u, const BoxDomain& dom) {
  EllipticABP r;
  r.contact = upper_contact_set(u, dom);
  r.U = r.contact.U;
  r.integral = contact_integral(u, dom, r.contact.mask, &r.clipped);
  if (r.clipped) r.warnings.push_back(std::to_string(r.clipped) + " contact points with det(-D^2 u) < 0 clipped to 0");
  r.constant = 3.0 * dom.diam() * std::pow(unit_ball_volume(dom.d), -1.0 / dom.d);
  r.bound = r.constant * std::pow(r.integral, 1.0 / dom.d);
  r.pass = r.U <= 1.1 * r.bound;
  return r;
}

DriftABP abp_drift_check(const std::vector<double>& u, const MatrixField& a, const std::vector<double>& f,
                         const BoxDomain& dom, double tolerance) {
  dom.validate();
  if (u.size() != dom.size() || f.size() != dom.size()) throw std::invalid_argument("grid function does not match the box");
  check_matrix_field(a, u.size(), dom.d);
  DriftABP r;
  r.U = *std::max_element(u.begin(), u.end()) - boundary_sup(u, dom);
  double cell = dom.cell_volume(), sum = 0.0;
  for (std::size_t p = 0; p < u.size(); ++p) {
    if (dom.on_boundary(p)) continue;
    const auto& ap = matrix_at(a, p);
    double Lu = (ap.array() * hessian_at(u.data(), dom, p).array()).sum();
    if (Lu - f[p] < -tolerance * (1.0 + std::abs(f[p])))
      throw PrereqViolated("a_ij u_ij >= f fails at grid point " + std::to_string(p));
    double fm = std::max(-f[p], 0.0);
    if (fm == 0.0) continue;
    double det = ap.determinant();
    if (!(det > 0.0)) {
      ++r.degenerate;
      continue;
    }
    sum += std::pow(fm / std::pow(det, 1.0 / dom.d), dom.d) * cell;
  }
  if (r.degenerate) r.warnings.push_back(std::to_string(r.degenerate) + " degenerate points with f^- > 0 excluded");
  r.norm = std::pow(sum, 1.0 / dom.d);
  r.constant = 3.0 * std::pow(unit_ball_volume(dom.d), -1.0 / dom.d);
  r.bound = r.constant * dom.diam() * r.norm;
  r.pass = r.U <= 1.1 * r.bound;
  return r;
}

void SpaceTimeDomain::validate() const {
  space.validate();
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (Mt < 2) throw std::invalid_argument("need at least two time levels");
}

ParabolicABP abp_parabolic_check(const std::vector<double>& u, const MatrixField& b, const std::vector<double>& f,
                                 const SpaceTimeDomain& dom, double constant, double tolerance) {
  dom.validate();
  if (u.size() != dom.size() || f.size() != dom.size())
    throw std::invalid_argument("grid function does not match the space-time box");
  const auto& sp = dom.space;
  int d = sp.d;
  std::size_t P = sp.size();
  check_matrix_field(b, u.size(), d);
  ParabolicABP r;
  r.constant = constant;
  r.sup_u = *std::max_element(u.begin(), u.end());
  r.sup_boundary = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < dom.Mt; ++k)
    for (std::size_t p = 0; p < P; ++p)
      if (k == 0 || sp.on_boundary(p)) r.sup_boundary = std::max(r.sup_boundary, u[k * P + p]);
  r.gap = r.sup_u - r.sup_boundary;

  double cell = sp.cell_volume() * dom.dt(), sum = 0.0;
  std::size_t in_E = 0, interior = 0;
  for (int k = 1; k < dom.Mt; ++k) {
    const double* slice = u.data() + k * P;
    for (std::size_t p = 0; p < P; ++p) {
      if (sp.on_boundary(p)) continue;
      ++interior;
      std::size_t q = k * P + p;
      double ut = k + 1 < dom.Mt ? (u[q + P] - u[q]) / dom.dt() : (u[q] - u[q - P]) / dom.dt();
      auto H = hessian_at(slice, sp, p);
      const auto& bq = matrix_at(b, q);
      double Lu = (bq.array() * H.array()).sum() - ut;
      if (Lu - f[q] < -tolerance * (1.0 + std::abs(f[q])))
        throw PrereqViolated("b_ij u_ij - u_t >= f fails at space-time point " + std::to_string(q));
      Eigen::SelfAdjointEigenSolver<SmallMat> es(H, Eigen::EigenvaluesOnly);
      if (ut < 0.0 || es.eigenvalues()[d - 1] > tolerance * (1.0 + H.norm())) continue;
      ++in_E;
      double fm = std::max(-f[q], 0.0);
      if (fm == 0.0) continue;
      double det = bq.determinant();
      if (!(det > 0.0)) {
        ++r.degenerate;
        continue;
      }
      sum += std::pow(fm / std::pow(det, 1.0 / (d + 1)), d + 1) * cell;
    }
  }
  if (r.degenerate) r.warnings.push_back(std::to_string(r.degenerate) + " degenerate points with f^- > 0 excluded");
  r.E_fraction = static_cast<double>(in_E) / interior;
  r.norm = std::pow(sum, 1.0 / (d + 1));
  r.bound = constant * std::pow(sp.diam(), static_cast<double>(d) / (d + 1)) * r.norm;
  r.pass = r.gap <= 1.1 * r.bound;
  return r;
}

std::vector<ParabolicInstance> paraboloid_family(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::vector<ParabolicInstance> out;
  for (int i = 0; i < count; ++i) {
    int d = i % 2 ? 2 : 1;
    SpaceTimeDomain dom{BoxDomain::cube(d, -1.0, 1.0, d == 1 ? 65 : 33), between(0.5, 2.0), 33};
    Eigen::MatrixXd R = Eigen::MatrixXd::NullaryExpr(d, d, [&] { return between(-1.0, 1.0); });
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(R);
    Eigen::MatrixXd O = qr.householderQ();
    Eigen::VectorXd ev(d);
    for (int a = 0; a < d; ++a) ev[a] = between(0.5, 2.0);
    Eigen::MatrixXd Q = O * ev.asDiagonal() * O.transpose();
    Eigen::VectorXd x0(d);
    for (int a = 0; a < d; ++a) x0[a] = between(-0.3, 0.3);
    double A = between(0.5, 2.0), beta = between(0.5, 2.0), T = dom.T;
    auto q = [&](const std::vector<double>& x) {
      Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(x.data(), d) - x0;
      return y.dot(Q * y);
    };
    ParabolicInstance inst{dom, {}, {}, {beta * Eigen::MatrixXd::Identity(d, d)}};
    inst.u = dom.sample([&](const std::vector<double>& x, double t) { return A * (t / T) * (1.0 - q(x)); });
    double trQ = Q.trace();
    inst.f = dom.sample([&](const std::vector<double>& x, double t) {
      return -2.0 * A * (t / T) * beta * trQ - A / T * (1.0 - q(x));
    });
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<QuadraticInstance> concave_quadratic_family(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto spd = [&](int d, double lo, double hi) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), e(lo, hi);
    Eigen::MatrixXd R = Eigen::MatrixXd::NullaryExpr(d, d, [&] { return u(rng); });
    Eigen::MatrixXd O = Eigen::HouseholderQR<Eigen::MatrixXd>(R).householderQ();
    Eigen::VectorXd ev(d);
    for (int a = 0; a < d; ++a) ev[a] = e(rng);
    return Eigen::MatrixXd(O * ev.asDiagonal() * O.transpose());
  };
  std::vector<QuadraticInstance> out;
  for (int i = 0; i < count; ++i) {
    int d = 1 + i % 2;
    auto dom = BoxDomain::cube(d, -1.0, 1.0, d == 2 ? 256 : 1024);
    auto Q = spd(d, 0.3, 2.0);
    Eigen::VectorXd c(d);
    for (int a = 0; a < d; ++a) c[a] = 0.6 * unit(rng) - 0.3;
    double top = 0.5 + unit(rng);
    auto u = dom.sample([&](const std::vector<double>& x) {
      Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(x.data(), d) - c;
      return top - y.dot(Q * y);
    });
    auto A = spd(d, 0.5, 2.0);
    std::vector<double> f(dom.size(), -2.0 * (A * Q).trace());
    out.push_back({dom, std::move(u), std::move(f), {A}});
  }
  return out;
}

double calibrate_parabolic_constant(int count, std::uint64_t seed) {
  double worst = 0.0;
  for (const auto& inst : paraboloid_family(count, seed)) {
    auto r = abp_parabolic_check(inst.u, inst.b, inst.f, inst.dom, 1.0);
    if (r.bound > 0.0) worst = std::max(worst, r.gap / r.bound);
  }
  return 1.25 * worst;
}

Cutoff cutoff_function(const TorusGrid& grid, const std::array<double, 4>& center, double r, double theta) {
  if (!(r > 0.0) || !(r < grid.period() / 4)) throw BadRadius("cutoff radius must lie in (0, period/4)");
  if (!(theta >= 0.0 && theta <= 0.5)) throw std::invalid_argument("theta must lie in [0, 1/2]");
  Cutoff c{ScalarField(grid, 1.0)};
  if (theta == 0.0) return c;
  double L = grid.period();
  int dims = grid.real_dims();
  for (std::size_t p = 0; p < grid.size(); ++p) {
    auto x = grid.coords(p);
    double R2 = 0.0;
    for (int a = 0; a < dims; ++a) {
      double dx = x[a] - center[a];
      dx -= L * std::round(dx / L);
      R2 += dx * dx;
    }
    double R = std::sqrt(R2), rho = (R - 0.5 * r) / (0.25 * r);
    if (rho <= 0.0) continue;
    if (rho >= 1.0) {
      c.eta[p] = 1.0 - theta;
      continue;
    }
    double s = rho * rho * rho * (10.0 + rho * (-15.0 + 6.0 * rho));
    double ds = 30.0 * rho * rho * (1.0 - rho) * (1.0 - rho);
    double d2s = 60.0 * rho * (1.0 - rho) * (1.0 - 2.0 * rho);
    c.eta[p] = 1.0 - theta * s;
    double d1 = theta * ds * 4.0 / r, d2 = theta * d2s * 16.0 / (r * r);
    c.sup_gradient_sq = std::max(c.sup_gradient_sq, d1 * d1);
    c.sup_hessian = std::max({c.sup_hessian, std::abs(d2), d1 / R});
  }
  c.c0 = std::max(r * r * c.sup_gradient_sq / (theta * theta), r * r * c.sup_hessian / theta);
  return c;
}

}  // namespace dlab
