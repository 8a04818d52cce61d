#include "pqpf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "pqpf/error.hpp"
#include "pqpf/special_functions.hpp"

namespace pqpf {
namespace {

enum Stream : std::uint64_t { kLayout = 1, kForecast = 2, kLatent = 3, kAmount = 4 };

std::string site_name(std::size_t index, std::size_t count) {
  const int width = count < 1000 ? 3 : static_cast<int>(std::to_string(count).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%0*zu", width, index + 1);
  return buf;
}

}  // namespace

void SynthSpec::validate() const {
  if (n_days < 1) fail(ErrorKind::Domain, "n_days must be at least 1");
  if (grid) {
    grid->validate();
  } else if (sites.empty()) {
    if (n_sites < 1) fail(ErrorKind::Domain, "n_sites must be at least 1");
    if (!(box_km > 0.0)) fail(ErrorKind::Domain, "box_km must be positive");
  }
  ExpCorrelation{truth.rho_km};
  ExpCorrelation{truth.r_km};
  ExpCorrelation{forecast.range_km};
  const auto& o = truth.occurrence;
  if (!std::isfinite(o.gamma0) || !std::isfinite(o.gamma1) || !std::isfinite(o.gamma2)) {
    fail(ErrorKind::Domain, "occurrence coefficients must be finite");
  }
  const auto& a = truth.amount;
  if (!(a.nu0 >= 0.0) || !(a.nu1 >= 0.0)) {
    fail(ErrorKind::Domain, "variance coefficients must be nonnegative");
  }
  if (!(forecast.wet_fraction > 0.0 && forecast.wet_fraction <= 1.0)) {
    fail(ErrorKind::Domain, "forecast wet fraction must be in (0, 1]");
  }
  if (!(forecast.max_cube_root > 0.0)) fail(ErrorKind::Domain, "max_cube_root must be positive");
  if (!(wet_bias >= 0.0)) fail(ErrorKind::Domain, "wet_bias must be nonnegative");
}

std::vector<Site> synth_sites(const SynthSpec& spec) {
  if (spec.grid) {
    std::vector<Site> out;
    const auto nodes = spec.grid->nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      out.push_back(Site{site_name(i, nodes.size()), nodes[i].x, nodes[i].y});
    }
    return out;
  }
  if (!spec.sites.empty()) return spec.sites;

  Rng rng(derive_seed(spec.seed, {kLayout}));
  const auto n = static_cast<std::size_t>(spec.n_sites);
  std::vector<Site> out;
  out.reserve(n);
  if (spec.layout == SiteLayout::Uniform) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = rng.uniform() * spec.box_km;
      const double y = rng.uniform() * spec.box_km;
      out.push_back(Site{site_name(i, n), x, y});
    }
  } else {
    constexpr int kClusters = 5;
    std::vector<Point> centers;
    for (int c = 0; c < kClusters; ++c) {
      centers.push_back({rng.uniform() * spec.box_km, rng.uniform() * spec.box_km});
    }
    const double spread = spec.box_km / 15.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = centers[i % kClusters];
      const double x = std::clamp(c.x + spread * rng.normal(), 0.0, spec.box_km);
      const double y = std::clamp(c.y + spread * rng.normal(), 0.0, spec.box_km);
      out.push_back(Site{site_name(i, n), x, y});
    }
  }
  return out;
}

double quantize_hundredths(double y0) noexcept { return y0 < 1.0 ? 0.0 : std::round(y0); }

Dataset synth_generate(const SynthSpec& spec) {
  spec.validate();
  const auto sites = synth_sites(spec);
  const auto n = static_cast<Eigen::Index>(sites.size());

  const MvnSampler forecast_field(Eigen::VectorXd::Zero(n),
                                  correlation_matrix(sites, ExpCorrelation(spec.forecast.range_km)));
  const Eigen::MatrixXd latent_lower =
      cholesky_lower(correlation_matrix(sites, ExpCorrelation(spec.truth.rho_km)));
  const MvnSampler amount_field(Eigen::VectorXd::Zero(n),
                                correlation_matrix(sites, ExpCorrelation(spec.truth.r_km)));

  const double a = spec.forecast.max_cube_root / spec.forecast.wet_fraction;
  const double c = a * (1.0 - spec.forecast.wet_fraction);

  std::vector<DailyRecord> records;
  records.reserve(sites.size() * static_cast<std::size_t>(spec.n_days));
  for (int day = 0; day < spec.n_days; ++day) {
    const Date date = spec.start_date + std::chrono::days{day};
    const auto d = static_cast<std::uint64_t>(day);

    Rng fcst_rng(derive_seed(spec.seed, {kForecast, d}));
    const Eigen::VectorXd g = forecast_field.sample(fcst_rng);

    Rng latent_rng(derive_seed(spec.seed, {kLatent, d}));
    Eigen::VectorXd noise(n);
    for (Eigen::Index i = 0; i < n; ++i) noise[i] = latent_rng.normal();
    const Eigen::VectorXd eps = latent_lower.triangularView<Eigen::Lower>() * noise;

    Rng amount_rng(derive_seed(spec.seed, {kAmount, d}));
    const Eigen::VectorXd z = amount_field.sample(amount_rng);

    for (Eigen::Index i = 0; i < n; ++i) {
      const double cube_root_fcst = std::max(0.0, a * special::normal_cdf(g[i]) - c);
      double fcst = cube_root_fcst * cube_root_fcst * cube_root_fcst;
      if (spec.wet_bias > 0.0) fcst += spec.wet_bias;
      const Accumulation fcst_acc(fcst);
      const CubeRootValue fcst_cr = cube_root(fcst_acc);
      const bool flag = zero_forecast_flag(fcst_acc);

      const double w = occurrence_trend(spec.truth.occurrence, fcst_cr, flag) + eps[i];
      double obs = 0.0;
      if (w > 0.0) {
        const auto marginal = gamma_marginal(spec.truth.amount, fcst_cr, flag);
        obs = quantize_hundredths(cube(anamorphosis(z[i], marginal)).value());
      }
      const auto& s = sites[static_cast<std::size_t>(i)];
      records.push_back(DailyRecord{s.id, s.x_km, s.y_km, date, obs, fcst});
    }
  }
  return Dataset(std::move(records));
}

}  // namespace pqpf
