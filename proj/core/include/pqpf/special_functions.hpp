#pragma once

// Normal and Gamma distribution numerics shared by the model, the estimators
// and the verification code.

namespace pqpf::special {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_pdf(double x) noexcept;
double normal_log_pdf(double x) noexcept;
double normal_cdf(double x) noexcept;
// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x) noexcept;
// Inverse of normal_cdf on (0, 1); +/-inf at the endpoints.
double normal_quantile(double p) noexcept;

// Regularized lower and upper incomplete gamma functions P(a, x), Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Gamma(shape, scale) distribution.
double gamma_cdf(double shape, double scale, double x);
double gamma_sf(double shape, double scale, double x);
double gamma_log_pdf(double shape, double scale, double x);
// Quantile at lower-tail probability p, or at upper-tail probability q when
// `upper` is set.
double gamma_quantile(double shape, double scale, double p, bool upper = false);

// 0 < p < 1 quantile of the chi-square distribution.
double chi_square_quantile(double dof, double p);

}  // namespace pqpf::special
