#include "dlab/krylov.hpp"

#include <algorithm>
#include <cmath>

namespace dlab {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s[4] = {0, 0, 0, 0};
  std::size_t n = a.size(), i = 0;
  for (; i + 4 <= n; i += 4)
    for (int j = 0; j < 4; ++j) s[j] += a[i + j] * b[i + j];
  for (; i < n; ++i) s[0] += a[i] * b[i];
  return (s[0] + s[1]) + (s[2] + s[3]);
}

void axpy(double s, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

}  // namespace

KrylovResult gmres(const LinearMap& a, const LinearMap& precond, const std::vector<double>& b,
                   std::vector<double>& x, double rtol, int restart, int max_iterations) {
  std::size_t m = b.size();
  KrylovResult res;
  double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.relative_residual = 0.0;
    res.converged = true;
    return res;
  }
  auto apply_m = [&](const std::vector<double>& in, std::vector<double>& out) {
    if (precond)
      precond(in, out);
    else
      out = in;
  };

  std::vector<double> r(m), w(m), z(m);
  std::vector<std::vector<double>> v(restart + 1);
  std::vector<std::vector<double>> h(restart + 1, std::vector<double>(restart, 0.0));
  std::vector<double> cs(restart), sn(restart), g(restart + 1), y(restart);

  while (res.iterations < max_iterations) {
    if (std::all_of(x.begin(), x.end(), [](double t) { return t == 0.0; })) {
      r = b;
    } else {
      a(x, w);
      for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - w[i];
    }
    double beta = std::sqrt(dot(r, r));
    res.relative_residual = beta / bnorm;
    if (res.relative_residual <= rtol) {
      res.converged = true;
      return res;
    }
    v[0].resize(m);
    for (std::size_t i = 0; i < m; ++i) v[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int k = 0;
    while (k < restart && res.iterations < max_iterations) {
      ++res.iterations;
      apply_m(v[k], z);
      a(z, w);
      for (int i = 0; i <= k; ++i) {
        h[i][k] = dot(w, v[i]);
        axpy(-h[i][k], v[i], w);
      }
      double hn = std::sqrt(dot(w, w));
      h[k + 1][k] = hn;
      for (int i = 0; i < k; ++i) {
        double t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
        h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
        h[i][k] = t;
      }
      double denom = std::hypot(h[k][k], h[k + 1][k]);
      cs[k] = h[k][k] / denom;
      sn[k] = h[k + 1][k] / denom;
      h[k][k] = denom;
      h[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      res.relative_residual = std::abs(g[k + 1]) / bnorm;
      ++k;
      if (res.relative_residual <= rtol || hn == 0.0) break;
      v[k].resize(m);
      for (std::size_t i = 0; i < m; ++i) v[k][i] = w[i] / hn;
    }
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= h[i][j] * y[j];
      y[i] = s / h[i][i];
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int i = 0; i < k; ++i) axpy(y[i], v[i], w);
    apply_m(w, z);
    axpy(1.0, z, x);
    if (res.relative_residual <= rtol) {
      a(x, w);
      for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - w[i];
      res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
      res.converged = res.relative_residual <= 10 * rtol;
      if (res.converged) return res;
    }
  }
  return res;
}

}  // namespace dlab
