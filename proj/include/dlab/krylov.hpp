#pragma once

#include <functional>
#include <vector>

namespace dlab {

using LinearMap = std::function<void(const std::vector<double>& in, std::vector<double>& out)>;

struct KrylovResult {
  int iterations = 0;
  double relative_residual = 1.0;
  bool converged = false;
};

// Restarted GMRES with right preconditioning: solves A x = b starting from
// the supplied x. precond may be empty for the identity.
KrylovResult gmres(const LinearMap& a, const LinearMap& precond, const std::vector<double>& b,
                   std::vector<double>& x, double rtol, int restart = 20, int max_iterations = 400);

}  // namespace dlab
