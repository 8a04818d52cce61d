#pragma once

#include <functional>
#include <vector>

namespace pqpf::optimize {

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

// Golden-section search for the maximum of `f` on [lo, hi]. Stops when the
// bracket is narrower than `tol`. The endpoints are also evaluated so the
// returned value is never below either endpoint.
ScalarOptimum golden_section_maximize(const std::function<double(double)>& f, double lo,
                                      double hi, double tol);

struct VectorOptimum {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Nelder-Mead simplex minimization (standard reflection/expansion/contraction/
// shrink coefficients). `step` sets the initial simplex edge per coordinate.
VectorOptimum nelder_mead_minimize(const std::function<double(const std::vector<double>&)>& f,
                                   std::vector<double> start, std::vector<double> step,
                                   double tol = 1e-10, int max_iterations = 5000);

}  // namespace pqpf::optimize
