#include "pqpf/optimize.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <limits>
#include <memory>

#include "pqpf/error.hpp"

namespace pqpf::optimize {
namespace {

constexpr double kHuge = std::numeric_limits<double>::max();

// GSL aborts on errors unless told otherwise; every status is checked here.
void quiet_gsl() {
  static const bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

struct ScalarTarget {
  const std::function<double(double)>* f;
  ScalarOptimum* best;
};

// GSL minimizes; we hand it -f and keep the best point seen.
double scalar_trampoline(double x, void* p) {
  auto* t = static_cast<ScalarTarget*>(p);
  const double v = (*t->f)(x);
  ++t->best->evaluations;
  if (v > t->best->value) {
    t->best->x = x;
    t->best->value = v;
  }
  return std::isfinite(v) ? -v : kHuge;
}

struct VectorTarget {
  const std::function<double(const std::vector<double>&)>* f;
  std::vector<double> buf;
};

double vector_trampoline(const gsl_vector* x, void* p) {
  auto* t = static_cast<VectorTarget*>(p);
  for (std::size_t i = 0; i < t->buf.size(); ++i) t->buf[i] = gsl_vector_get(x, i);
  const double v = (*t->f)(t->buf);
  return std::isfinite(v) ? v : kHuge;
}

}  // namespace

ScalarOptimum golden_section_maximize(const std::function<double(double)>& f, double lo,
                                      double hi, double tol) {
  if (!(hi > lo)) fail(ErrorKind::Domain, "golden-section interval is empty");
  quiet_gsl();
  ScalarOptimum best{lo, -std::numeric_limits<double>::infinity(), 0};
  ScalarTarget target{&f, &best};
  gsl_function fn{&scalar_trampoline, &target};

  const double g_lo = scalar_trampoline(lo, &target);
  const double g_hi = scalar_trampoline(hi, &target);
  // GSL needs an interior point below both ends; probe the golden point, then a grid.
  double x = lo + (1.0 - 0.5 * (std::sqrt(5.0) - 1.0)) * (hi - lo);
  double g_x = scalar_trampoline(x, &target);
  for (int k = 1; k < 64 && !(g_x < g_lo && g_x < g_hi); ++k) {
    x = lo + (hi - lo) * k / 64.0;
    g_x = scalar_trampoline(x, &target);
  }
  if (!(g_x < g_lo && g_x < g_hi)) return best;

  std::unique_ptr<gsl_min_fminimizer, decltype(&gsl_min_fminimizer_free)> s(
      gsl_min_fminimizer_alloc(gsl_min_fminimizer_goldensection), &gsl_min_fminimizer_free);
  if (gsl_min_fminimizer_set_with_values(s.get(), &fn, x, g_x, lo, g_lo, hi, g_hi) != GSL_SUCCESS) {
    fail(ErrorKind::Numerical, "golden-section search could not start");
  }
  for (int it = 0; it < 1000; ++it) {
    if (gsl_min_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    if (gsl_min_fminimizer_x_upper(s.get()) - gsl_min_fminimizer_x_lower(s.get()) <= tol) break;
  }
  return best;
}

VectorOptimum nelder_mead_minimize(const std::function<double(const std::vector<double>&)>& f,
                                   std::vector<double> start, std::vector<double> step,
                                   double tol, int max_iterations) {
  const std::size_t n = start.size();
  if (n == 0 || step.size() != n) fail(ErrorKind::Domain, "Nelder-Mead dimension mismatch");
  quiet_gsl();

  VectorTarget target{&f, std::vector<double>(n)};
  gsl_multimin_function fn{&vector_trampoline, n, &target};
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x0(gsl_vector_alloc(n), &gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> ss(gsl_vector_alloc(n), &gsl_vector_free);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x0.get(), i, start[i]);
    gsl_vector_set(ss.get(), i, step[i]);
  }
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n),
      &gsl_multimin_fminimizer_free);
  if (gsl_multimin_fminimizer_set(s.get(), &fn, x0.get(), ss.get()) != GSL_SUCCESS) {
    fail(ErrorKind::Numerical, "Nelder-Mead could not start");
  }

  VectorOptimum result;
  for (int it = 0; it < max_iterations; ++it) {
    result.iterations = it + 1;
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), std::sqrt(tol)) == GSL_SUCCESS) {
      result.converged = true;
      break;
    }
  }
  result.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.x[i] = gsl_vector_get(s->x, i);
  result.value = s->fval;
  return result;
}

}  // namespace pqpf::optimize
