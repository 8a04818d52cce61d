#include "pqpf/special_functions.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "pqpf/error.hpp"

namespace pqpf::special {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_shape(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    fail(ErrorKind::Domain, "gamma shape must be positive and finite");
  }
}

// Boost reports failures by exception; map them onto ours.
template <typename F>
double guarded(const char* what, double a, double x, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    fail(ErrorKind::Numerical, std::string(what) + " failed (a=" + std::to_string(a) +
                                   ", x=" + std::to_string(x) + "): " + e.what());
  }
}

}  // namespace

double normal_pdf(double x) noexcept { return std::exp(normal_log_pdf(x)); }

double normal_log_pdf(double x) noexcept { return -0.5 * x * x - kLogSqrt2Pi; }

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_sf(double x) noexcept { return 0.5 * std::erfc(x * kInvSqrt2); }

double normal_quantile(double p) noexcept {
  if (std::isnan(p)) return p;
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

double gamma_p(double a, double x) {
  check_shape(a);
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return guarded("incomplete gamma", a, x, [&] { return boost::math::gamma_p(a, x); });
}

double gamma_q(double a, double x) {
  check_shape(a);
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return guarded("incomplete gamma", a, x, [&] { return boost::math::gamma_q(a, x); });
}

double gamma_cdf(double shape, double scale, double x) { return gamma_p(shape, x / scale); }

double gamma_sf(double shape, double scale, double x) { return gamma_q(shape, x / scale); }

double gamma_log_pdf(double shape, double scale, double x) {
  if (x <= 0.0) return -kInf;
  return (shape - 1.0) * std::log(x) - x / scale - std::lgamma(shape) - shape * std::log(scale);
}

double gamma_quantile(double shape, double scale, double p, bool upper) {
  check_shape(shape);
  if (!(scale > 0.0)) fail(ErrorKind::Domain, "gamma scale must be positive");
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::Domain, "probability outside [0, 1]");
  if (p == 0.0) return upper ? kInf : 0.0;
  if (p == 1.0) return upper ? 0.0 : kInf;
  const double x = guarded("gamma quantile", shape, p, [&] {
    return upper ? boost::math::gamma_q_inv(shape, p) : boost::math::gamma_p_inv(shape, p);
  });
  return x * scale;
}

double chi_square_quantile(double dof, double p) {
  return 2.0 * gamma_quantile(0.5 * dof, 1.0, p);
}

}  // namespace pqpf::special
