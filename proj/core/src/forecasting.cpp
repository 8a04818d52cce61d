#include "pqpf/forecasting.hpp"

#include <cmath>
#include <fstream>

#include "pqpf/error.hpp"
#include "pqpf/special_functions.hpp"
#include "pqpf/text_io.hpp"

namespace pqpf {
namespace {

void check_members(int n_members) {
  if (n_members < 1) fail(ErrorKind::Domain, "ensemble needs at least one member");
}

std::vector<SiteMarginal> marginals_for(const FittedModel& model, std::span<const double> fcst,
                                        std::vector<std::size_t>& fallback) {
  std::vector<SiteMarginal> out;
  out.reserve(fcst.size());
  for (std::size_t j = 0; j < fcst.size(); ++j) {
    out.push_back(site_marginal(model, fcst[j]));
    if (out.back().mean_fallback) fallback.push_back(j);
  }
  return out;
}

// Steps (iii)-(iv): dry where W <= 0, otherwise the anamorphosed amount, cubed.
double member_value(double w, double z, const SiteMarginal& m) {
  if (w <= 0.0) return 0.0;
  return cube(anamorphosis(z, m.gamma)).value();
}

ForecastEnsemble site_ensemble(const FittedModel& model, std::span<const SiteForecast> input,
                               int n_members, std::uint64_t seed, bool spatial) {
  model.validate();
  check_members(n_members);
  if (input.empty()) fail(ErrorKind::Domain, "site ensemble needs at least one site");

  ForecastEnsemble ens;
  ens.seed = seed;
  std::vector<double> fcst;
  for (const auto& s : input) {
    ens.sites.push_back(s.site);
    fcst.push_back(s.fcst);
  }
  const auto marg = marginals_for(model, fcst, ens.fallback_locations);
  const auto j = static_cast<Eigen::Index>(input.size());

  Eigen::VectorXd mu(j);
  for (Eigen::Index i = 0; i < j; ++i) mu[i] = marg[static_cast<std::size_t>(i)].mu;

  Eigen::MatrixXd lower_w = Eigen::MatrixXd::Identity(j, j);
  Eigen::MatrixXd lower_z = Eigen::MatrixXd::Identity(j, j);
  if (spatial && j > 1) {
    lower_w = cholesky_lower(correlation_matrix(std::span<const Site>(ens.sites), ExpCorrelation(model.rho_km)));
    lower_z = cholesky_lower(correlation_matrix(std::span<const Site>(ens.sites), ExpCorrelation(model.r_km)));
  }

  ens.members.resize(n_members, j);
  Eigen::VectorXd e_w(j), e_z(j);
  for (int m = 0; m < n_members; ++m) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(m)}));
    for (Eigen::Index i = 0; i < j; ++i) e_w[i] = rng.normal();
    for (Eigen::Index i = 0; i < j; ++i) e_z[i] = rng.normal();
    const Eigen::VectorXd w = mu + lower_w.triangularView<Eigen::Lower>() * e_w;
    const Eigen::VectorXd z = lower_z.triangularView<Eigen::Lower>() * e_z;
    for (Eigen::Index i = 0; i < j; ++i) {
      ens.members(m, i) = member_value(w[i], z[i], marg[static_cast<std::size_t>(i)]);
    }
  }
  return ens;
}

}  // namespace

void GriddedForecast::validate() const {
  grid.validate();
  if (fcst.size() != grid.size()) {
    fail(ErrorKind::Domain, "gridded forecast has " + std::to_string(fcst.size()) +
                                " values for " + std::to_string(grid.size()) + " cells");
  }
  for (const double v : fcst) Accumulation{v};
}

std::vector<SiteForecast> interpolate_to_sites(const GriddedForecast& input,
                                               std::span<const Site> sites) {
  input.validate();
  std::vector<SiteForecast> out;
  out.reserve(sites.size());
  for (const auto& s : sites) {
    const double v = bilinear_interpolate(input.fcst, input.grid, s.location());
    out.push_back({s, std::max(v, 0.0)});
  }
  return out;
}

SiteMarginal site_marginal(const FittedModel& model, double fcst) {
  const Accumulation f(fcst);
  const CubeRootValue cr = cube_root(f);
  const bool flag = zero_forecast_flag(f);
  SiteMarginal m;
  m.mu = occurrence_trend(model.occurrence, cr, flag);
  m.p0 = special::normal_sf(m.mu);
  double mean = gamma_mean(model.amount, cr, flag);
  if (!(mean > 0.0)) {
    mean = model.min_valid_mean;
    m.mean_fallback = true;
  }
  m.gamma = gamma_from_moments(mean, gamma_variance(model.amount, cr));
  return m;
}

ForecastEnsemble generate_site_ensemble(const FittedModel& model,
                                        std::span<const SiteForecast> input, int n_members,
                                        std::uint64_t seed) {
  return site_ensemble(model, input, n_members, seed, true);
}

ForecastEnsemble independence_baseline_ensemble(const FittedModel& model,
                                                std::span<const SiteForecast> input,
                                                int n_members, std::uint64_t seed) {
  return site_ensemble(model, input, n_members, seed, false);
}

ForecastEnsemble generate_grid_ensemble(const FittedModel& model, const GriddedForecast& input,
                                        int n_members, std::uint64_t seed) {
  model.validate();
  check_members(n_members);
  input.validate();

  ForecastEnsemble ens;
  ens.seed = seed;
  ens.grid = input.grid;
  const auto marg = marginals_for(model, input.fcst, ens.fallback_locations);

  auto embed = [&](double range) {
    try {
      return CirculantEmbedding(input.grid, ExpCorrelation(range));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmbeddingFailure) throw;
      fail(ErrorKind::EmbeddingFailure,
           std::string(e.what()) + "; use a smaller grid or the site path for this range");
    }
  };
  const auto w_field = embed(model.rho_km);
  const auto z_field = embed(model.r_km);

  const auto cells = static_cast<Eigen::Index>(input.grid.size());
  ens.members.resize(n_members, cells);
  for (int m = 0; m < n_members; ++m) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(m)}));
    const auto w = w_field.sample(rng);
    const auto z = z_field.sample(rng);
    for (Eigen::Index c = 0; c < cells; ++c) {
      const auto k = static_cast<std::size_t>(c);
      ens.members(m, c) = member_value(marg[k].mu + w[k], z[k], marg[k]);
    }
  }
  return ens;
}

double areal_average(std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::Domain, "areal average over zero sites");
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<double> areal_ensemble(const FittedModel& model, std::span<const SiteForecast> input,
                                   int n_members, std::uint64_t seed) {
  const auto ens = generate_site_ensemble(model, input, n_members, seed);
  std::vector<double> out(static_cast<std::size_t>(ens.n_members()));
  std::vector<double> row(static_cast<std::size_t>(ens.n_locations()));
  for (Eigen::Index m = 0; m < ens.n_members(); ++m) {
    for (Eigen::Index j = 0; j < ens.n_locations(); ++j) row[static_cast<std::size_t>(j)] = ens.members(m, j);
    out[static_cast<std::size_t>(m)] = areal_average(row);
  }
  return out;
}

EmpiricalClimatology EmpiricalClimatology::pooled(std::vector<double> values) {
  if (values.empty()) fail(ErrorKind::NoTrainingData, "climatology needs historical values");
  for (const double v : values) Accumulation{v};
  EmpiricalClimatology c;
  c.values_ = std::move(values);
  return c;
}

EmpiricalClimatology EmpiricalClimatology::joint(Eigen::MatrixXd tuples) {
  if (tuples.rows() == 0 || tuples.cols() == 0) {
    fail(ErrorKind::NoTrainingData, "climatology needs historical tuples");
  }
  for (Eigen::Index i = 0; i < tuples.size(); ++i) Accumulation{tuples.data()[i]};
  EmpiricalClimatology c;
  c.tuples_ = std::move(tuples);
  c.joint_ = true;
  return c;
}

Eigen::MatrixXd climatology_forecast(const EmpiricalClimatology& history) {
  if (history.is_joint()) return history.tuples();
  const auto v = history.values();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write_site_ensemble_csv(const ForecastEnsemble& ens, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Validation, "cannot write " + path);
  out << "member,site_id,value_hundredths_inch\n";
  for (Eigen::Index m = 0; m < ens.n_members(); ++m) {
    for (Eigen::Index j = 0; j < ens.n_locations(); ++j) {
      out << m + 1 << ',' << ens.sites[static_cast<std::size_t>(j)].id << ','
          << format_decimal(ens.members(m, j)) << '\n';
    }
  }
  if (!out) fail(ErrorKind::Validation, "write failed: " + path);
}

std::vector<std::string> write_grid_ensemble_csv(const ForecastEnsemble& ens,
                                                 const std::string& prefix) {
  if (!ens.grid) fail(ErrorKind::Domain, "ensemble has no grid");
  const int nx = ens.grid->nx;
  const std::size_t width = std::max<std::size_t>(4, std::to_string(ens.n_members()).size());
  std::vector<std::string> paths;
  for (Eigen::Index m = 0; m < ens.n_members(); ++m) {
    std::string tag = std::to_string(m + 1);
    tag.insert(0, width - tag.size(), '0');
    const std::string path = prefix + tag + ".csv";
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Validation, "cannot write " + path);
    out << "row,col,value_hundredths_inch\n";
    for (Eigen::Index c = 0; c < ens.n_locations(); ++c) {
      out << c / nx << ',' << c % nx << ',' << format_decimal(ens.members(m, c)) << '\n';
    }
    if (!out) fail(ErrorKind::Validation, "write failed: " + path);
    paths.push_back(path);
  }
  return paths;
}

void write_scalar_ensemble_csv(std::span<const double> values, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Validation, "cannot write " + path);
  out << "member,value_hundredths_inch\n";
  for (std::size_t m = 0; m < values.size(); ++m) {
    out << m + 1 << ',' << format_decimal(values[m]) << '\n';
  }
  if (!out) fail(ErrorKind::Validation, "write failed: " + path);
}

}  // namespace pqpf
