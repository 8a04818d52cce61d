#pragma once

// Deterministic mathematics of the two-stage precipitation model: the
// cube-root scale, the probit occurrence trend, forecast-dependent Gamma
// marginals for the cube-root amount, and the Gaussian anamorphosis that
// links the amount process to those marginals.

namespace pqpf {

// Precipitation accumulation in hundredths of an inch.
class Accumulation {
 public:
  Accumulation() = default;
  explicit Accumulation(double hundredths);

  double value() const noexcept { return value_; }
  bool is_zero() const noexcept { return value_ == 0.0; }

 private:
  double value_ = 0.0;
};

// Cube root of an accumulation, (hundredths of an inch)^(1/3).
class CubeRootValue {
 public:
  CubeRootValue() = default;
  explicit CubeRootValue(double value);

  double value() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

CubeRootValue cube_root(Accumulation y0);
Accumulation cube(CubeRootValue y);

// Probit coefficients of the occurrence trend mu = g0 + g1 * fcst + g2 * I.
struct OccurrenceTrendParams {
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

// Mean (eta) and variance (nu) regressions of the cube-root Gamma marginal.
// nu0 and nu1 are nonnegative.
struct GammaCoeffs {
  double eta0 = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double nu0 = 0.0;
  double nu1 = 0.0;
};

struct GammaMarginal {
  double alpha = 1.0;  // shape
  double beta = 1.0;   // scale

  double mean() const noexcept { return alpha * beta; }
  double variance() const noexcept { return alpha * beta * beta; }
};

// Occurrence and amount models use an indicator of an exactly-zero forecast on
// the native scale.
inline bool zero_forecast_flag(Accumulation fcst) noexcept { return fcst.is_zero(); }

double occurrence_trend(const OccurrenceTrendParams& params, CubeRootValue fcst, bool zero_flag);

// Probability of precipitation at an isolated site, Phi(mu).
double occurrence_probability(const OccurrenceTrendParams& params, CubeRootValue fcst,
                              bool zero_flag);

double gamma_mean(const GammaCoeffs& coeffs, CubeRootValue fcst, bool zero_flag) noexcept;
double gamma_variance(const GammaCoeffs& coeffs, CubeRootValue fcst) noexcept;

// Moment inversion alpha = m^2 / v, beta = v / m.
// Throws NonpositiveMean / NonpositiveVariance.
GammaMarginal gamma_from_moments(double mean, double variance);
GammaMarginal gamma_marginal(const GammaCoeffs& coeffs, CubeRootValue fcst, bool zero_flag);

// Gaussian scores are confined to [-kZClamp, kZClamp]; beyond that the normal
// CDF saturates in double precision.
inline constexpr double kZClamp = 8.0;

// y = G^{-1}(Phi(z)), the cube-root amount carried by Gaussian score z.
CubeRootValue anamorphosis(double z, const GammaMarginal& marginal);

// z = Phi^{-1}(G(y)) for y > 0, clamped to [-kZClamp, kZClamp].
double anamorphosis_inverse(CubeRootValue y, const GammaMarginal& marginal);

// Predictive CDF on the accumulation scale: p0 + (1 - p0) G(y0^(1/3)).
double mixed_cdf(double p0, const GammaMarginal& marginal, Accumulation y0);

}  // namespace pqpf
