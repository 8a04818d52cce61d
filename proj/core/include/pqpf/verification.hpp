#pragma once

// Proper scores and calibration diagnostics for scalar and multi-site
// predictive ensembles: CRPS, MAE of the median, Brier and energy scores,
// verification-rank, PIT and minimum-spanning-tree rank histograms, and
// reliability tables.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pqpf/model.hpp"
#include "pqpf/rng.hpp"

namespace pqpf {

// Ensemble CRPS: mean |x_i - x| - (1 / 2m^2) sum_ij |x_i - x_j|.
double crps_ensemble(std::span<const double> members, double obs);

// A predictive CDF on [0, inf) for numeric scoring. `breakpoints` are jumps or
// kinks; F(x) is taken as 1 beyond `upper` (up to the stated tail error).
struct PredictiveCdf {
  std::function<double(double)> cdf;
  std::vector<double> breakpoints;
  double upper = 0.0;

  static PredictiveCdf empirical(std::span<const double> members);
  static PredictiveCdf mixed(double p0, const GammaMarginal& marginal);
  static PredictiveCdf point_mass(double at);
};

// Integral of (F(t) - 1{obs <= t})^2 over [0, inf) by adaptive Gauss-Kronrod.
// Throws Numerical when the error estimate exceeds `tolerance`.
double crps_numeric(const PredictiveCdf& forecast, double obs, double tolerance = 1e-8);

double ensemble_median(std::span<const double> members);
double mae_of_median(std::span<const double> members, double obs);

double brier_score(double prob, bool occurred);

// Members are rows; J = columns.
double energy_score(const Eigen::MatrixXd& members, const Eigen::VectorXd& obs);

// Rank of the observation in {1, ..., m + 1}. A zero observation among m0 zero
// members draws uniformly from {1, ..., m0 + 1}; ties among nonzero values
// are also broken uniformly.
int verification_rank(std::span<const double> members, double obs, Rng& rng);

// Randomized PIT of the mixed predictive law; uniform on [0, p0] when obs = 0.
double pit_value(double p0, const GammaMarginal& marginal, double obs, Rng& rng);

// Randomized PIT of an empirical distribution: uniform on [F(obs-), F(obs)].
double pit_empirical(std::span<const double> members, double obs, Rng& rng);

// Total edge length of the Euclidean minimum spanning tree over the rows.
double mst_length(const Eigen::MatrixXd& points);

// Rank in {1, ..., m + 1} of the ensemble-only MST length among it and the m
// lengths with the observation substituted for each member.
int mst_rank(const Eigen::MatrixXd& members, const Eigen::VectorXd& obs, Rng& rng);

struct ReliabilityBin {
  double center = 0.0;
  double mean_prob = 0.0;
  double observed_freq = 0.0;
  std::size_t count = 0;
};

inline constexpr int kDefaultReliabilityBins = 10;
inline constexpr int kDefaultPitBins = 20;

std::vector<ReliabilityBin> reliability_table(std::span<const double> probs,
                                              const std::vector<bool>& outcomes,
                                              int n_bins = kDefaultReliabilityBins);

// Ranks 1..m+1 tallied into m + 1 categories.
std::vector<std::size_t> rank_histogram(std::span<const int> ranks, int n_members);
// Equal-width bins on [0, 1]; 1.0 falls in the last bin.
std::vector<std::size_t> pit_histogram(std::span<const double> values, int n_bins = kDefaultPitBins);

// Pearson statistic against equal expected counts.
double chi_square_statistic(std::span<const std::size_t> counts);
// Upper critical value of the chi-square law with k - 1 degrees of freedom.
double chi_square_critical(std::size_t n_bins, double level = 0.999);
bool passes_uniformity(std::span<const std::size_t> counts, double level = 0.999);

}  // namespace pqpf
