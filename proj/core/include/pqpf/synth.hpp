#pragma once

// Synthetic forecast/observation worlds drawn from the two-stage model with
// known parameters, so estimators and scores can be checked against truth.

#include <cstdint>
#include <optional>
#include <vector>

#include "pqpf/dataset.hpp"
#include "pqpf/model.hpp"
#include "pqpf/random_fields.hpp"

namespace pqpf {

struct TrueParameters {
  OccurrenceTrendParams occurrence{-0.3, 0.3, 0.1};
  double rho_km = 25.0;
  GammaCoeffs amount{2.0, 0.6, 0.5, 0.04, 0.004};
  double r_km = 15.0;
};

enum class SiteLayout { Uniform, Clustered };

// The NWP surrogate: cube-root forecast = max(0, a * Phi(G) - c) where G is a
// unit Gaussian field. a and c are set so that `wet_fraction` of sites get a
// nonzero forecast and wet cube-root forecasts are uniform on
// (0, max_cube_root).
struct ForecastFieldSettings {
  double range_km = 15.0;
  double wet_fraction = 0.6;
  double max_cube_root = 4.0;
};

struct SynthSpec {
  int n_sites = 50;
  double box_km = 300.0;
  SiteLayout layout = SiteLayout::Uniform;
  std::vector<Site> sites;       // explicit layout; overrides n_sites/box_km
  std::optional<GridSpec> grid;  // grid-node layout; overrides everything else
  int n_days = 60;
  Date start_date = Date{std::chrono::year{2003} / 1 / 1};
  TrueParameters truth;
  ForecastFieldSettings forecast;
  // Added to every forecast accumulation (hundredths), imitating an NWP wet bias.
  double wet_bias = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

std::vector<Site> synth_sites(const SynthSpec& spec);

// Observations are quantized to whole hundredths; amounts below one hundredth
// are recorded as zero.
Dataset synth_generate(const SynthSpec& spec);

// Rounding convention applied to synthetic observations.
double quantize_hundredths(double y0) noexcept;

}  // namespace pqpf
