#pragma once

// Staged estimation of the two-stage model from a sliding training window:
// probit occurrence trend, stochastic-EM occurrence range, Gamma mean
// regression, constrained Gamma variance likelihood, and the amount range by
// profile marginal likelihood.

#include <cstdint>
#include <string>
#include <vector>

#include "pqpf/dataset.hpp"
#include "pqpf/model.hpp"

namespace pqpf {

struct TrainingWindow {
  Dataset data;            // records of the selected dates only
  Date valid_date{};
  int requested_days = 0;  // M
  bool short_window = false;
};

// The min(M, available) most recent dates strictly before `valid_date`.
// Throws NoTrainingData when none are available.
TrainingWindow make_window(const Dataset& dataset, Date valid_date, int window_days);

struct SemConfig {
  int n_iterations = 50;
  int n_burn_iterations = 10;
  int gibbs_sweeps = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

struct ProbitFit {
  OccurrenceTrendParams params;
  int iterations = 0;
  double score_norm = 0.0;
  double log_likelihood = 0.0;
  bool forecast_column_dropped = false;
  bool indicator_column_dropped = false;
};

ProbitFit fit_probit_trend(const TrainingWindow& window);

struct SemFit {
  double rho_km = 0.0;
  std::vector<double> trajectory;  // rho after each M-step
  double final_log_likelihood = 0.0;
};

SemFit fit_occurrence_range(const TrainingWindow& window, const OccurrenceTrendParams& trend,
                            const SemConfig& config);

struct MeanFit {
  double eta0 = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  std::size_t n_wet = 0;
  bool indicator_column_dropped = false;
};

MeanFit fit_gamma_mean(const TrainingWindow& window);

struct VarianceFit {
  double nu0 = 0.0;
  double nu1 = 0.0;
  double log_likelihood = 0.0;
  std::size_t n_used = 0;
  bool at_boundary = false;  // nu1 == 0
};

// Sum over wet records with a positive implied mean of the Gamma log density
// of the cube-root observation.
double gamma_variance_log_likelihood(const TrainingWindow& window, const MeanFit& eta,
                                     double nu0, double nu1);

VarianceFit fit_gamma_variance(const TrainingWindow& window, const MeanFit& eta);

struct RangeFit {
  double r_km = 0.0;
  double objective = 0.0;
  std::size_t n_days_used = 0;  // days with at least two wet sites
};

// Daily Gaussian log-likelihood of the transformed wet amounts for range r.
// `with_jacobian` adds the r-independent Jacobian terms.
double amount_range_objective(const TrainingWindow& window, const GammaCoeffs& coeffs,
                              double r_km, bool with_jacobian = false);

RangeFit fit_amount_range(const TrainingWindow& window, const GammaCoeffs& coeffs);

// Search interval and tolerance shared by both range estimators (log km).
inline constexpr double kMinRangeKm = 1.0;
inline constexpr double kMaxRangeKm = 2000.0;
inline constexpr double kLogRangeTolerance = 1e-3;

struct FitDiagnostics {
  std::string valid_date;
  int window_days = 0;
  bool short_window = false;
  std::size_t n_records = 0;
  std::size_t n_wet = 0;
  int probit_iterations = 0;
  double probit_score_norm = 0.0;
  double probit_log_likelihood = 0.0;
  double occurrence_log_likelihood = 0.0;
  bool eta2_dropped = false;
  double variance_log_likelihood = 0.0;
  bool nu1_at_boundary = false;
  double amount_log_likelihood = 0.0;
  std::size_t amount_days = 0;
};

struct FittedModel {
  OccurrenceTrendParams occurrence;
  double rho_km = 1.0;
  GammaCoeffs amount;
  double r_km = 1.0;
  // Smallest positive implied Gamma mean over the training records; used when
  // a forecast-time mean is not positive.
  double min_valid_mean = 1.0;
  FitDiagnostics diagnostics;

  void validate() const;
};

// Runs the five stages in order; any stage failure surfaces as FitError
// naming the stage, and no model is returned.
FittedModel fit_model(const TrainingWindow& window, const SemConfig& config);

void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

}  // namespace pqpf
