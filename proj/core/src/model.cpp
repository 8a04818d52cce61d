#include "pqpf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pqpf/error.hpp"
#include "pqpf/special_functions.hpp"

namespace pqpf {

Accumulation::Accumulation(double hundredths) : value_(hundredths) {
  if (!(hundredths >= 0.0) || !std::isfinite(hundredths)) {
    fail(ErrorKind::Domain, "accumulation must be finite and nonnegative, got " +
                                std::to_string(hundredths));
  }
}

CubeRootValue::CubeRootValue(double value) : value_(value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    fail(ErrorKind::Domain, "cube-root value must be finite and nonnegative, got " +
                                std::to_string(value));
  }
}

CubeRootValue cube_root(Accumulation y0) { return CubeRootValue(std::cbrt(y0.value())); }

Accumulation cube(CubeRootValue y) {
  const double v = y.value();
  return Accumulation(v * v * v);
}

double occurrence_trend(const OccurrenceTrendParams& p, CubeRootValue fcst, bool zero_flag) {
  const double mu = p.gamma0 + p.gamma1 * fcst.value() + (zero_flag ? p.gamma2 : 0.0);
  if (!std::isfinite(mu)) fail(ErrorKind::Domain, "non-finite occurrence trend");
  return mu;
}

double occurrence_probability(const OccurrenceTrendParams& p, CubeRootValue fcst,
                              bool zero_flag) {
  return special::normal_cdf(occurrence_trend(p, fcst, zero_flag));
}

double gamma_mean(const GammaCoeffs& c, CubeRootValue fcst, bool zero_flag) noexcept {
  return c.eta0 + c.eta1 * fcst.value() + (zero_flag ? c.eta2 : 0.0);
}

double gamma_variance(const GammaCoeffs& c, CubeRootValue fcst) noexcept {
  const double f = fcst.value();
  return c.nu0 + c.nu1 * f * f * f;
}

GammaMarginal gamma_from_moments(double mean, double variance) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    fail(ErrorKind::NonpositiveMean, "implied Gamma mean is not positive: " + std::to_string(mean));
  }
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    fail(ErrorKind::NonpositiveVariance,
         "implied Gamma variance is not positive: " + std::to_string(variance));
  }
  return GammaMarginal{mean * mean / variance, variance / mean};
}

GammaMarginal gamma_marginal(const GammaCoeffs& c, CubeRootValue fcst, bool zero_flag) {
  return gamma_from_moments(gamma_mean(c, fcst, zero_flag), gamma_variance(c, fcst));
}

CubeRootValue anamorphosis(double z, const GammaMarginal& g) {
  if (!std::isfinite(z)) fail(ErrorKind::Domain, "anamorphosis argument must be finite");
  z = std::clamp(z, -kZClamp, kZClamp);
  // Invert in whichever tail keeps full relative precision.
  const double y = z <= 0.0 ? special::gamma_quantile(g.alpha, g.beta, special::normal_cdf(z))
                            : special::gamma_quantile(g.alpha, g.beta, special::normal_sf(z), true);
  if (y == 0.0) return CubeRootValue(std::numeric_limits<double>::min());  // underflow
  if (!(y > 0.0) || !std::isfinite(y)) {
    fail(ErrorKind::Numerical, "anamorphosis produced a non-positive amount (alpha=" +
                                   std::to_string(g.alpha) + ", beta=" + std::to_string(g.beta) +
                                   ")");
  }
  return CubeRootValue(y);
}

double anamorphosis_inverse(CubeRootValue y, const GammaMarginal& g) {
  if (!(y.value() > 0.0)) fail(ErrorKind::Domain, "anamorphosis inverse needs y > 0");
  const double lower = special::gamma_cdf(g.alpha, g.beta, y.value());
  const double z = lower <= 0.5 ? special::normal_quantile(lower)
                                : -special::normal_quantile(special::gamma_sf(g.alpha, g.beta, y.value()));
  return std::clamp(z, -kZClamp, kZClamp);
}

double mixed_cdf(double p0, const GammaMarginal& g, Accumulation y0) {
  if (y0.is_zero()) return p0;
  return p0 + (1.0 - p0) * special::gamma_cdf(g.alpha, g.beta, std::cbrt(y0.value()));
}

}  // namespace pqpf
