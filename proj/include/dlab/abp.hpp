#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dlab/grid.hpp"

namespace dlab {

// Tensor grid on a box in R^d, endpoints included; the last axis varies fastest.
struct BoxDomain {
  int d = 2;
  std::vector<double> lower, upper;
  int M_pts = 64;

  static BoxDomain cube(int d, double lo, double hi, int M_pts);
  void validate() const;
  double diam() const;
  double spacing(int axis) const;
  double cell_volume() const;
  std::size_t size() const;
  std::vector<int> multi_index(std::size_t p) const;
  std::size_t flat_index(const std::vector<int>& idx) const;
  std::vector<double> point(std::size_t p) const;
  bool on_boundary(std::size_t p) const;

  template <class Fn>
  std::vector<double> sample(Fn&& fn) const {
    std::vector<double> u(size());
    for (std::size_t p = 0; p < u.size(); ++p) u[p] = fn(point(p));
    return u;
  }
};

// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

struct ContactSet {
  std::vector<char> mask;
  std::size_t count = 0;
  double U = 0.0;  // sup u - sup over the boundary
  double gradient_cap = 0.0;
  bool U_nonpositive = false;
};

ContactSet upper_contact_set(const std::vector<double>& u, const BoxDomain& dom);
// Exhaustive supporting-plane and gradient-cap re-scan of every flagged point.
bool verify_contact_set(const std::vector<double>& u, const BoxDomain& dom, const ContactSet& set);

struct EllipticABP {
  double U = 0.0;
  double integral = 0.0;  // over the contact set of det(-D^2 u)_+
  double constant = 0.0;  // 3 diam omega_d^{-1/d}
  double bound = 0.0;
  bool pass = false;
  std::size_t clipped = 0;  // contact points with det(-D^2 u) < 0
  ContactSet contact;
  std::vector<std::string> warnings;
};

EllipticABP abp_elliptic_check(const std::vector<double>& u, const BoxDomain& dom);
// Midpoint quadrature of det(-D^2 u)_+ over a mask of interior points.
double contact_integral(const std::vector<double>& u, const BoxDomain& dom, const std::vector<char>& mask,
                        std::size_t* clipped = nullptr);

// One symmetric d x d matrix per grid point, or a single matrix for a constant field.
using MatrixField = std::vector<Eigen::MatrixXd>;

struct DriftABP {
  double U = 0.0;
  double norm = 0.0;      // || f^- / D* ||_{L^d}
  double constant = 0.0;  // 3 omega_d^{-1/d}
  double bound = 0.0;
  bool pass = false;
  std::size_t degenerate = 0;  // points with det a = 0 and f^- > 0, excluded
  std::vector<std::string> warnings;
};

DriftABP abp_drift_check(const std::vector<double>& u, const MatrixField& a, const std::vector<double>& f,
                         const BoxDomain& dom, double tolerance = 1e-8);

// Space-time grid: Mt levels t_k = k T / (Mt - 1); values indexed k * dom.size() + p.
struct SpaceTimeDomain {
  BoxDomain space;
  double T = 1.0;
  int Mt = 32;

  void validate() const;
  double dt() const { return T / (Mt - 1); }
  std::size_t size() const { return space.size() * Mt; }
  template <class Fn>
  std::vector<double> sample(Fn&& fn) const {
    std::vector<double> u(size());
    for (int k = 0; k < Mt; ++k)
      for (std::size_t p = 0; p < space.size(); ++p) u[k * space.size() + p] = fn(space.point(p), k * dt());
    return u;
  }
};

// Calibrated on paraboloid_family(64, 0) and frozen.
inline constexpr double parabolic_abp_constant = 0.33754072305679717;

struct ParabolicABP {
  double sup_u = 0.0;
  double sup_boundary = 0.0;  // over the initial slice and the lateral boundary
  double gap = 0.0;
  double norm = 0.0;  // || f^- / D ||_{L^{d+1}(E)}
  double constant = 0.0;
  double bound = 0.0;
  double E_fraction = 0.0;
  bool pass = false;
  std::size_t degenerate = 0;
  std::vector<std::string> warnings;
};

ParabolicABP abp_parabolic_check(const std::vector<double>& u, const MatrixField& b, const std::vector<double>& f,
                                 const SpaceTimeDomain& dom, double constant = parabolic_abp_constant,
                                 double tolerance = 1e-8);

struct ParabolicInstance {
  SpaceTimeDomain dom;
  std::vector<double> u, f;
  MatrixField b;
};

// u = A (t/T) (1 - (x - x0)^T Q (x - x0)) with b = beta I and f = b : D^2 u - u_t.
std::vector<ParabolicInstance> paraboloid_family(int count, std::uint64_t seed);
struct QuadraticInstance {
  BoxDomain dom;
  std::vector<double> u, f;
  MatrixField a;
};

// u = top - (x - c)^T Q (x - c) with Q > 0, constant a > 0 and f = a : D^2 u; d alternates 1, 2
// on grids of 1024 and 256 points per side.
std::vector<QuadraticInstance> concave_quadratic_family(int count, std::uint64_t seed);

// gap / (diam^{d/(d+1)} ||f^-/D||) maximized over the family, times 1.25.
double calibrate_parabolic_constant(int count, std::uint64_t seed);

struct Cutoff {
  ScalarField eta;
  double sup_gradient_sq = 0.0;  // Euclidean, real coordinates
  double sup_hessian = 0.0;      // operator norm
  double c0 = 0.0;
};

// eta = 1 on B(center, r/2), 1 - theta outside B(center, 3r/4), radial quintic in between.
Cutoff cutoff_function(const TorusGrid& grid, const std::array<double, 4>& center, double r, double theta);

}  // namespace dlab
