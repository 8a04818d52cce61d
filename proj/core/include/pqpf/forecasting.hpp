#pragma once

// Predictive ensembles from a fitted model and one day's NWP forecast: site
// ensembles, gridded fields, areal composites, and the reference forecasts
// (climatology, spatially independent baseline).

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pqpf/estimation.hpp"
#include "pqpf/random_fields.hpp"

namespace pqpf {

inline constexpr int kDefaultArealMembers = 10000;
inline constexpr int kDefaultSiteMembers = 19;
inline constexpr int kDefaultGridMembers = 50;

struct SiteForecast {
  Site site;
  double fcst = 0.0;  // hundredths of an inch
};

struct GriddedForecast {
  GridSpec grid;
  std::vector<double> fcst;  // row-major, grid.size() values

  void validate() const;
};

// Bilinear interpolation of the gridded forecast to the sites.
std::vector<SiteForecast> interpolate_to_sites(const GriddedForecast& input,
                                               std::span<const Site> sites);

// Predictive law of one site: P(Y0 = 0) and the cube-root Gamma of the wet part.
struct SiteMarginal {
  double mu = 0.0;  // occurrence trend
  double p0 = 1.0;
  GammaMarginal gamma;
  bool mean_fallback = false;  // implied mean was not positive
};

SiteMarginal site_marginal(const FittedModel& model, double fcst);

struct ForecastEnsemble {
  Eigen::MatrixXd members;        // n_members x J accumulations
  std::vector<Site> sites;        // site path
  std::optional<GridSpec> grid;   // grid path; columns follow row-major cells
  std::uint64_t seed = 0;
  std::vector<std::size_t> fallback_locations;  // columns with a substituted mean

  Eigen::Index n_members() const noexcept { return members.rows(); }
  Eigen::Index n_locations() const noexcept { return members.cols(); }
};

ForecastEnsemble generate_site_ensemble(const FittedModel& model,
                                        std::span<const SiteForecast> input, int n_members,
                                        std::uint64_t seed);

// Same marginals with the spatial correlation removed.
ForecastEnsemble independence_baseline_ensemble(const FittedModel& model,
                                                std::span<const SiteForecast> input,
                                                int n_members, std::uint64_t seed);

ForecastEnsemble generate_grid_ensemble(const FittedModel& model, const GriddedForecast& input,
                                        int n_members, std::uint64_t seed);

double areal_average(std::span<const double> values);

// Areal mean over `input` for each member of a site ensemble.
std::vector<double> areal_ensemble(const FittedModel& model, std::span<const SiteForecast> input,
                                   int n_members, std::uint64_t seed);

// Historical observations used as an exchangeable ensemble. Joint tuples hold
// one row per historical day.
class EmpiricalClimatology {
 public:
  static EmpiricalClimatology pooled(std::vector<double> values);
  static EmpiricalClimatology joint(Eigen::MatrixXd tuples);

  std::span<const double> values() const noexcept { return values_; }
  const Eigen::MatrixXd& tuples() const noexcept { return tuples_; }
  bool is_joint() const noexcept { return joint_; }

 private:
  std::vector<double> values_;
  Eigen::MatrixXd tuples_;
  bool joint_ = false;
};

// Scalar ensemble for the pooled case, or the joint tuples as members.
Eigen::MatrixXd climatology_forecast(const EmpiricalClimatology& history);

void write_site_ensemble_csv(const ForecastEnsemble& ensemble, const std::string& path);
// One file per member, `<prefix><member>.csv`, cells in row-major order.
std::vector<std::string> write_grid_ensemble_csv(const ForecastEnsemble& ensemble,
                                                 const std::string& prefix);
void write_scalar_ensemble_csv(std::span<const double> values, const std::string& path);

}  // namespace pqpf
