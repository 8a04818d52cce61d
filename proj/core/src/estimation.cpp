#include "pqpf/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <type_traits>

#include "pqpf/error.hpp"
#include "pqpf/optimize.hpp"
#include "pqpf/random_fields.hpp"
#include "pqpf/special_functions.hpp"
#include "pqpf/text_io.hpp"

namespace pqpf {
namespace {

// Record covariates on the model scales.
struct Covariates {
  double fcst_cr = 0.0;
  bool zero_fcst = false;
  bool wet = false;
  double obs_cr = 0.0;
  std::size_t site = 0;  // index into window.data.sites()
};

// One training day: covariates of its records and the ordered site indices.
struct Day {
  std::vector<Covariates> records;
  std::vector<std::size_t> sites;
};

std::vector<Day> prepare_days(const TrainingWindow& window) {
  const auto& sites = window.data.sites();
  std::map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < sites.size(); ++i) index.emplace(sites[i].id, i);

  std::vector<Day> days;
  for (const Date d : window.data.dates()) {
    Day day;
    for (const auto& r : window.data.on(d)) {
      Covariates c;
      const Accumulation fcst(r.fcst);
      c.fcst_cr = cube_root(fcst).value();
      c.zero_fcst = zero_forecast_flag(fcst);
      c.wet = r.obs > 0.0;
      c.obs_cr = std::cbrt(r.obs);
      c.site = index.at(r.site_id);
      day.records.push_back(c);
      day.sites.push_back(c.site);
    }
    days.push_back(std::move(day));
  }
  return days;
}

std::vector<Point> site_points(const TrainingWindow& window, const std::vector<std::size_t>& idx) {
  const auto& sites = window.data.sites();
  std::vector<Point> pts;
  pts.reserve(idx.size());
  for (const auto i : idx) pts.push_back(sites[i].location());
  return pts;
}

// log Phi(t), accurate in the far lower tail.
double log_normal_cdf(double t) {
  if (t > -30.0) return std::log(special::normal_cdf(t));
  const double t2 = t * t;
  return -0.5 * t2 - std::log(-t) - special::kLogSqrt2Pi + std::log1p(-1.0 / t2 + 3.0 / (t2 * t2));
}

// phi(t) / Phi(t).
double mills_lower(double t) { return std::exp(special::normal_log_pdf(t) - log_normal_cdf(t)); }

double median_pairwise_distance(const std::vector<Site>& sites) {
  std::vector<double> d;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) d.push_back(distance(sites[i].location(), sites[j].location()));
  }
  if (d.empty()) return 50.0;
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  return std::max(d[d.size() / 2], 2.0 * kMinRangeKm);
}

// Days grouped by identical site sets so that correlation factors are shared.
std::map<std::vector<std::size_t>, std::vector<std::size_t>> group_by_sites(
    const std::vector<std::vector<std::size_t>>& site_sets) {
  std::map<std::vector<std::size_t>, std::vector<std::size_t>> groups;
  for (std::size_t d = 0; d < site_sets.size(); ++d) groups[site_sets[d]].push_back(d);
  return groups;
}

}  // namespace

// ---------------------------------------------------------------------------

TrainingWindow make_window(const Dataset& dataset, Date valid_date, int window_days) {
  if (window_days < 1) fail(ErrorKind::Domain, "window length must be at least 1 day");
  const auto& dates = dataset.dates();
  const auto end = std::lower_bound(dates.begin(), dates.end(), valid_date);
  const auto available = static_cast<int>(end - dates.begin());
  if (available == 0) {
    fail(ErrorKind::NoTrainingData, "no dates before " + format_date(valid_date));
  }
  const int take = std::min(window_days, available);
  const auto begin = end - take;
  std::vector<DailyRecord> records;
  for (auto it = begin; it != end; ++it) {
    const auto day = dataset.on(*it);
    records.insert(records.end(), day.begin(), day.end());
  }
  TrainingWindow w;
  w.data = Dataset(std::move(records));
  w.valid_date = valid_date;
  w.requested_days = window_days;
  w.short_window = take < window_days;
  return w;
}

void SemConfig::validate() const {
  if (n_iterations < 1 || n_burn_iterations < 0 || n_iterations <= n_burn_iterations) {
    fail(ErrorKind::Domain, "SEM needs n_iterations > n_burn_iterations >= 0");
  }
  if (gibbs_sweeps < 1) fail(ErrorKind::Domain, "SEM needs at least one Gibbs sweep");
}

// ---------------------------------------------------------------------------
// Probit trend

ProbitFit fit_probit_trend(const TrainingWindow& window) {
  const auto days = prepare_days(window);
  std::vector<Covariates> recs;
  for (const auto& d : days) recs.insert(recs.end(), d.records.begin(), d.records.end());

  const auto n_wet = std::count_if(recs.begin(), recs.end(), [](const Covariates& c) { return c.wet; });
  if (n_wet == 0 || n_wet == static_cast<long>(recs.size())) {
    fail(ErrorKind::DegenerateOccurrence,
         n_wet == 0 ? "every training record is dry" : "every training record is wet");
  }

  ProbitFit fit;
  const bool any_fcst = std::any_of(recs.begin(), recs.end(), [](const Covariates& c) { return c.fcst_cr > 0.0; });
  const auto n_flag = std::count_if(recs.begin(), recs.end(), [](const Covariates& c) { return c.zero_fcst; });
  fit.forecast_column_dropped = !any_fcst;
  fit.indicator_column_dropped = n_flag == 0 || n_flag == static_cast<long>(recs.size());

  std::vector<int> columns{0};
  if (!fit.forecast_column_dropped) columns.push_back(1);
  if (!fit.indicator_column_dropped) columns.push_back(2);
  const auto p = static_cast<Eigen::Index>(columns.size());
  const auto n = static_cast<Eigen::Index>(recs.size());

  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = recs[static_cast<std::size_t>(i)];
    const double full[3] = {1.0, c.fcst_cr, c.zero_fcst ? 1.0 : 0.0};
    for (Eigen::Index k = 0; k < p; ++k) x(i, k) = full[columns[static_cast<std::size_t>(k)]];
    y[i] = c.wet ? 1.0 : 0.0;
  }

  auto log_likelihood = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = x * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) ll += log_normal_cdf(y[i] > 0.5 ? eta[i] : -eta[i]);
    return ll;
  };

  // Newton-Raphson on the observed information with step halving.
  constexpr int kMaxIterations = 100;
  constexpr double kScoreTolerance = 1e-8;
  constexpr double kDivergenceNorm = 1e3;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  {
    const double wet_frac = static_cast<double>(n_wet) / static_cast<double>(n);
    beta[0] = special::normal_quantile(wet_frac);
  }
  double ll = log_likelihood(beta);
  bool converged = false;
  for (int it = 1; it <= kMaxIterations; ++it) {
    fit.iterations = it;
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd score = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = y[i] > 0.5 ? 1.0 : -1.0;
      const double t = s * eta[i];
      const double lambda = mills_lower(t);
      const double g = s * lambda;              // d loglik / d eta
      const double w = lambda * (lambda + t);   // -d2 loglik / d eta2
      score += g * x.row(i).transpose();
      info.noalias() += w * x.row(i).transpose() * x.row(i);
    }
    fit.score_norm = score.norm();
    if (fit.score_norm < kScoreTolerance) {
      converged = true;
      break;
    }
    const Eigen::VectorXd step = info.ldlt().solve(score);
    if (!step.allFinite()) fail(ErrorKind::Numerical, "probit information matrix is singular");
    // Near the optimum the gain is below the rounding of the summed
    // log-likelihood, so only a clear decrease triggers step halving.
    const double slack = 1e-11 * (1.0 + std::abs(ll));
    double scale = 1.0;
    Eigen::VectorXd trial = beta + step;
    double trial_ll = log_likelihood(trial);
    while (!(trial_ll >= ll - slack) && scale > 1e-10) {
      scale *= 0.5;
      trial = beta + scale * step;
      trial_ll = log_likelihood(trial);
    }
    if (!(trial_ll >= ll - slack)) {
      // No ascent possible along the Newton direction; treat as converged at
      // numerical precision.
      converged = fit.score_norm < 1e-6;
      break;
    }
    beta = trial;
    ll = trial_ll;
    if (beta.norm() > kDivergenceNorm) {
      fail(ErrorKind::SeparationDetected, "probit coefficients diverge (norm > 1e3)");
    }
  }
  // Complete separation: every record classified with certainty.
  if (ll > -1e-6) {
    fail(ErrorKind::SeparationDetected, "occurrence is perfectly separated by the covariates");
  }
  if (!converged) fail(ErrorKind::Numerical, "probit regression did not converge");

  double full[3] = {0.0, 0.0, 0.0};
  for (Eigen::Index k = 0; k < p; ++k) full[columns[static_cast<std::size_t>(k)]] = beta[k];
  fit.params = OccurrenceTrendParams{full[0], full[1], full[2]};
  fit.log_likelihood = ll;
  return fit;
}

// ---------------------------------------------------------------------------
// Stochastic EM for the occurrence range

SemFit fit_occurrence_range(const TrainingWindow& window, const OccurrenceTrendParams& trend,
                            const SemConfig& config) {
  config.validate();
  const auto days = prepare_days(window);

  struct LatentDay {
    std::vector<std::size_t> sites;
    Eigen::VectorXd mean;
    OrthantConstraint constraint;
    Eigen::VectorXd state;
  };
  std::vector<LatentDay> latent;
  for (const auto& d : days) {
    if (d.records.size() < 2) continue;
    LatentDay ld;
    ld.sites = d.sites;
    const auto k = static_cast<Eigen::Index>(d.records.size());
    ld.mean.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto& c = d.records[static_cast<std::size_t>(i)];
      ld.mean[i] = occurrence_trend(trend, CubeRootValue(c.fcst_cr), c.zero_fcst);
      ld.constraint.push_back(c.wet ? Orthant::Positive : Orthant::Nonpositive);
    }
    latent.push_back(std::move(ld));
  }
  if (latent.empty()) {
    fail(ErrorKind::RangeUnidentifiable, "no training day has two or more sites");
  }

  std::vector<std::vector<std::size_t>> site_sets;
  for (const auto& ld : latent) site_sets.push_back(ld.sites);
  const auto groups = group_by_sites(site_sets);
  std::vector<std::vector<Point>> group_points;
  for (const auto& [sites, members] : groups) group_points.push_back(site_points(window, sites));

  auto correlation_for = [&](std::size_t g, double rho) {
    return correlation_matrix(std::span<const Point>(group_points[g]), ExpCorrelation(rho));
  };

  // Initial imputation: feasible starting points from the trend alone.
  for (auto& ld : latent) {
    auto chain = TruncatedMvnGibbs::from_precision(
        ld.mean, Eigen::MatrixXd::Identity(ld.mean.size(), ld.mean.size()), ld.constraint);
    ld.state = chain.state();
  }

  auto log_likelihood = [&](double rho) {
    double total = 0.0;
    std::size_t g = 0;
    for (const auto& [sites, members] : groups) {
      const Eigen::MatrixXd lower = cholesky_lower(correlation_for(g, rho));
      for (const auto d : members) {
        total += mvn_log_density_factored(latent[d].state, latent[d].mean, lower);
      }
      ++g;
    }
    return total;
  };

  SemFit fit;
  double rho = median_pairwise_distance(window.data.sites()) / 2.0;
  for (int it = 0; it < config.n_iterations; ++it) {
    // E-step: one Gibbs-imputed latent field per day, warm-started.
    std::size_t g = 0;
    for (const auto& [sites, members] : groups) {
      const Eigen::MatrixXd precision = inverse_from_lower(cholesky_lower(correlation_for(g, rho)));
      for (const auto d : members) {
        auto& ld = latent[d];
        auto chain = TruncatedMvnGibbs::from_precision(ld.mean, precision, ld.constraint);
        chain.set_state(ld.state);
        Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(it), d}));
        for (int s = 0; s < config.gibbs_sweeps; ++s) chain.sweep(rng);
        ld.state = chain.state();
      }
      ++g;
    }
    // M-step: maximize the complete-data likelihood over log rho.
    const auto best = optimize::golden_section_maximize(
        [&](double log_rho) { return log_likelihood(std::exp(log_rho)); }, std::log(kMinRangeKm),
        std::log(kMaxRangeKm), kLogRangeTolerance);
    rho = std::exp(best.x);
    fit.trajectory.push_back(rho);
    fit.final_log_likelihood = best.value;
  }
  const auto first = fit.trajectory.begin() + config.n_burn_iterations;
  fit.rho_km = std::accumulate(first, fit.trajectory.end(), 0.0) /
               static_cast<double>(fit.trajectory.end() - first);
  return fit;
}

// ---------------------------------------------------------------------------
// Gamma mean regression

MeanFit fit_gamma_mean(const TrainingWindow& window) {
  const auto days = prepare_days(window);
  std::vector<Covariates> wet;
  for (const auto& d : days) {
    for (const auto& c : d.records) {
      if (c.wet) wet.push_back(c);
    }
  }
  if (wet.size() < 3) {
    fail(ErrorKind::InsufficientData, "mean regression needs at least 3 wet records, got " +
                                          std::to_string(wet.size()));
  }
  MeanFit fit;
  fit.n_wet = wet.size();
  fit.indicator_column_dropped =
      std::none_of(wet.begin(), wet.end(), [](const Covariates& c) { return c.zero_fcst; });
  const Eigen::Index p = fit.indicator_column_dropped ? 2 : 3;
  const auto n = static_cast<Eigen::Index>(wet.size());
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = wet[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    x(i, 1) = c.fcst_cr;
    if (p == 3) x(i, 2) = c.zero_fcst ? 1.0 : 0.0;
    y[i] = c.obs_cr;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) fail(ErrorKind::InsufficientData, "mean regression design is rank deficient");
  const Eigen::VectorXd beta = qr.solve(y);
  fit.eta0 = beta[0];
  fit.eta1 = beta[1];
  fit.eta2 = p == 3 ? beta[2] : 0.0;
  return fit;
}

// ---------------------------------------------------------------------------
// Gamma variance by constrained maximum likelihood

namespace {

struct WetPoint {
  double mean;
  double fcst_cubed;
  double obs_cr;
};

std::vector<WetPoint> wet_points(const TrainingWindow& window, const MeanFit& eta) {
  const GammaCoeffs c{eta.eta0, eta.eta1, eta.eta2, 0.0, 0.0};
  std::vector<WetPoint> out;
  for (const auto& d : prepare_days(window)) {
    for (const auto& r : d.records) {
      if (!r.wet) continue;
      const double m = gamma_mean(c, CubeRootValue(r.fcst_cr), r.zero_fcst);
      if (!(m > 0.0)) continue;
      out.push_back({m, r.fcst_cr * r.fcst_cr * r.fcst_cr, r.obs_cr});
    }
  }
  return out;
}

double variance_log_likelihood(const std::vector<WetPoint>& pts, double nu0, double nu1) {
  double ll = 0.0;
  for (const auto& p : pts) {
    const double v = nu0 + nu1 * p.fcst_cubed;
    if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
    const double shape = p.mean * p.mean / v;
    const double scale = v / p.mean;
    ll += special::gamma_log_pdf(shape, scale, p.obs_cr);
  }
  return ll;
}

}  // namespace

double gamma_variance_log_likelihood(const TrainingWindow& window, const MeanFit& eta,
                                     double nu0, double nu1) {
  return variance_log_likelihood(wet_points(window, eta), nu0, nu1);
}

VarianceFit fit_gamma_variance(const TrainingWindow& window, const MeanFit& eta) {
  const auto pts = wet_points(window, eta);
  std::size_t n_wet = 0;
  for (const auto& r : window.data.records()) n_wet += r.obs > 0.0;
  if (n_wet >= 10 && pts.empty()) {
    fail(ErrorKind::NonpositiveMean, "every wet record has a nonpositive implied Gamma mean");
  }
  if (pts.size() < 10) {
    fail(ErrorKind::InsufficientData, "variance fit needs at least 10 wet records with a "
                                      "positive implied mean, got " + std::to_string(pts.size()));
  }

  // Moment-based starting scale.
  double resid2 = 0.0, mean_fc3 = 0.0;
  for (const auto& p : pts) {
    resid2 += (p.obs_cr - p.mean) * (p.obs_cr - p.mean);
    mean_fc3 += p.fcst_cubed;
  }
  resid2 /= static_cast<double>(pts.size());
  mean_fc3 /= static_cast<double>(pts.size());
  resid2 = std::max(resid2, 1e-6);
  const double slope_scale = mean_fc3 > 0.0 ? resid2 / mean_fc3 : 1.0;

  // theta = (log nu0, t) with nu1 = max(t, 0): the projection onto the
  // feasible set is exact, so a negative unconstrained slope lands on nu1 = 0.
  auto negative_ll = [&](const std::vector<double>& theta) {
    const double ll = variance_log_likelihood(pts, std::exp(theta[0]), std::max(theta[1], 0.0));
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
  };

  const std::vector<std::vector<double>> starts{
      {std::log(resid2), 0.0},
      {std::log(0.5 * resid2), 0.5 * slope_scale},
      {std::log(0.1 * resid2), slope_scale},
  };
  optimize::VectorOptimum best;
  best.value = std::numeric_limits<double>::max();
  for (const auto& s : starts) {
    auto opt = optimize::nelder_mead_minimize(negative_ll, s, {0.5, std::max(0.5 * slope_scale, 1e-3)},
                                              1e-12, 4000);
    // Polish from the best vertex with a smaller simplex.
    opt = optimize::nelder_mead_minimize(negative_ll, opt.x,
                                         {0.05, std::max(0.05 * slope_scale, 1e-4)}, 1e-14, 4000);
    if (opt.value < best.value) best = opt;
  }

  VarianceFit fit;
  fit.nu0 = std::exp(best.x[0]);
  fit.nu1 = std::max(best.x[1], 0.0);
  fit.log_likelihood = -best.value;
  fit.n_used = pts.size();
  fit.at_boundary = fit.nu1 == 0.0;
  return fit;
}

// ---------------------------------------------------------------------------
// Amount range by profile marginal likelihood

namespace {

struct AmountDay {
  std::vector<Point> points;
  Eigen::VectorXd z;
  double jacobian = 0.0;  // sum of log g(y) + z^2 / 2
};

std::vector<AmountDay> amount_days(const TrainingWindow& window, const GammaCoeffs& coeffs) {
  const auto& sites = window.data.sites();
  std::vector<AmountDay> out;
  for (const auto& d : prepare_days(window)) {
    AmountDay ad;
    std::vector<double> z;
    for (const auto& r : d.records) {
      if (!r.wet) continue;
      const CubeRootValue fcst(r.fcst_cr);
      const double m = gamma_mean(coeffs, fcst, r.zero_fcst);
      const double v = gamma_variance(coeffs, fcst);
      if (!(m > 0.0) || !(v > 0.0)) continue;
      const auto g = gamma_from_moments(m, v);
      const double zj = anamorphosis_inverse(CubeRootValue(r.obs_cr), g);
      z.push_back(zj);
      ad.points.push_back(sites[r.site].location());
      ad.jacobian += special::gamma_log_pdf(g.alpha, g.beta, r.obs_cr) + 0.5 * zj * zj;
    }
    if (z.empty()) continue;
    ad.z = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
    out.push_back(std::move(ad));
  }
  return out;
}

double amount_objective(const std::vector<AmountDay>& days, double r, bool with_jacobian) {
  const ExpCorrelation corr(r);
  double total = 0.0;
  for (const auto& d : days) {
    const Eigen::MatrixXd c = correlation_matrix(std::span<const Point>(d.points), corr);
    total += mvn_log_density(d.z, Eigen::VectorXd::Zero(d.z.size()), c);
    if (with_jacobian) total += d.jacobian;
  }
  return total;
}

}  // namespace

double amount_range_objective(const TrainingWindow& window, const GammaCoeffs& coeffs,
                              double r_km, bool with_jacobian) {
  return amount_objective(amount_days(window, coeffs), r_km, with_jacobian);
}

RangeFit fit_amount_range(const TrainingWindow& window, const GammaCoeffs& coeffs) {
  const auto days = amount_days(window, coeffs);
  RangeFit fit;
  fit.n_days_used = static_cast<std::size_t>(
      std::count_if(days.begin(), days.end(), [](const AmountDay& d) { return d.z.size() >= 2; }));
  if (fit.n_days_used == 0) {
    fail(ErrorKind::RangeUnidentifiable, "no training day has two or more wet sites");
  }
  const auto best = optimize::golden_section_maximize(
      [&](double log_r) { return amount_objective(days, std::exp(log_r), false); },
      std::log(kMinRangeKm), std::log(kMaxRangeKm), kLogRangeTolerance);
  fit.r_km = std::exp(best.x);
  fit.objective = best.value;
  return fit;
}

// ---------------------------------------------------------------------------

void FittedModel::validate() const {
  ExpCorrelation{rho_km};
  ExpCorrelation{r_km};
  if (!(amount.nu0 >= 0.0) || !(amount.nu1 >= 0.0)) {
    fail(ErrorKind::Validation, "variance coefficients must be nonnegative");
  }
  if (!(min_valid_mean > 0.0)) fail(ErrorKind::Validation, "min_valid_mean must be positive");
}

FittedModel fit_model(const TrainingWindow& window, const SemConfig& config) {
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const FitError&) {
      throw;
    } catch (const Error& e) {
      throw FitError(name, e);
    }
  };

  FittedModel model;
  const auto probit = stage("probit", [&] { return fit_probit_trend(window); });
  const auto sem = stage("occurrence_range",
                         [&] { return fit_occurrence_range(window, probit.params, config); });
  const auto mean = stage("gamma_mean", [&] { return fit_gamma_mean(window); });
  const auto var = stage("gamma_variance", [&] { return fit_gamma_variance(window, mean); });
  model.occurrence = probit.params;
  model.rho_km = sem.rho_km;
  model.amount = GammaCoeffs{mean.eta0, mean.eta1, mean.eta2, var.nu0, var.nu1};
  const auto range = stage("amount_range", [&] { return fit_amount_range(window, model.amount); });
  model.r_km = range.r_km;

  double min_mean = std::numeric_limits<double>::infinity();
  for (const auto& r : window.data.records()) {
    const Accumulation f(r.fcst);
    const double m = gamma_mean(model.amount, cube_root(f), zero_forecast_flag(f));
    if (m > 0.0) min_mean = std::min(min_mean, m);
  }
  model.min_valid_mean = std::isfinite(min_mean) ? min_mean : 1.0;

  auto& diag = model.diagnostics;
  diag.valid_date = format_date(window.valid_date);
  diag.window_days = static_cast<int>(window.data.dates().size());
  diag.short_window = window.short_window;
  diag.n_records = window.data.size();
  diag.n_wet = mean.n_wet;
  diag.probit_iterations = probit.iterations;
  diag.probit_score_norm = probit.score_norm;
  diag.probit_log_likelihood = probit.log_likelihood;
  diag.occurrence_log_likelihood = sem.final_log_likelihood;
  diag.eta2_dropped = mean.indicator_column_dropped;
  diag.variance_log_likelihood = var.log_likelihood;
  diag.nu1_at_boundary = var.at_boundary;
  diag.amount_log_likelihood = range.objective;
  diag.amount_days = range.n_days_used;
  return model;
}

// ---------------------------------------------------------------------------
// Parameter file

void save_model(const FittedModel& model, const std::string& path) {
  const auto& d = model.diagnostics;
  auto flag = [](bool b) { return std::string(b ? "1" : "0"); };
  write_key_values(path, {
      {"gamma0", format_precise(model.occurrence.gamma0)},
      {"gamma1", format_precise(model.occurrence.gamma1)},
      {"gamma2", format_precise(model.occurrence.gamma2)},
      {"rho_km", format_precise(model.rho_km)},
      {"eta0", format_precise(model.amount.eta0)},
      {"eta1", format_precise(model.amount.eta1)},
      {"eta2", format_precise(model.amount.eta2)},
      {"nu0", format_precise(model.amount.nu0)},
      {"nu1", format_precise(model.amount.nu1)},
      {"r_km", format_precise(model.r_km)},
      {"min_valid_mean", format_precise(model.min_valid_mean)},
      {"valid_date", d.valid_date},
      {"window_days", std::to_string(d.window_days)},
      {"short_window", flag(d.short_window)},
      {"n_records", std::to_string(d.n_records)},
      {"n_wet", std::to_string(d.n_wet)},
      {"probit_iterations", std::to_string(d.probit_iterations)},
      {"probit_score_norm", format_precise(d.probit_score_norm)},
      {"probit_log_likelihood", format_precise(d.probit_log_likelihood)},
      {"occurrence_log_likelihood", format_precise(d.occurrence_log_likelihood)},
      {"eta2_dropped", flag(d.eta2_dropped)},
      {"variance_log_likelihood", format_precise(d.variance_log_likelihood)},
      {"nu1_at_boundary", flag(d.nu1_at_boundary)},
      {"amount_log_likelihood", format_precise(d.amount_log_likelihood)},
      {"amount_days", std::to_string(d.amount_days)},
  });
}

FittedModel load_model(const std::string& path) {
  const auto kv = read_key_values(path);
  FittedModel m;
  m.occurrence = {require_double(kv, "gamma0"), require_double(kv, "gamma1"),
                  require_double(kv, "gamma2")};
  m.rho_km = require_double(kv, "rho_km");
  m.amount = {require_double(kv, "eta0"), require_double(kv, "eta1"), require_double(kv, "eta2"),
              require_double(kv, "nu0"), require_double(kv, "nu1")};
  m.r_km = require_double(kv, "r_km");
  m.min_valid_mean = require_double(kv, "min_valid_mean");
  // Diagnostics keys are optional.
  auto& d = m.diagnostics;
  auto number = [&](const char* key, auto& out) {
    if (kv.find(key) == kv.end()) return;
    out = static_cast<std::remove_reference_t<decltype(out)>>(require_double(kv, key));
  };
  auto flag = [&](const char* key, bool& out) {
    if (kv.find(key) == kv.end()) return;
    out = require_double(kv, key) != 0.0;
  };
  if (const auto it = kv.find("valid_date"); it != kv.end()) d.valid_date = it->second;
  number("window_days", d.window_days);
  flag("short_window", d.short_window);
  number("n_records", d.n_records);
  number("n_wet", d.n_wet);
  number("probit_iterations", d.probit_iterations);
  number("probit_score_norm", d.probit_score_norm);
  number("probit_log_likelihood", d.probit_log_likelihood);
  number("occurrence_log_likelihood", d.occurrence_log_likelihood);
  flag("eta2_dropped", d.eta2_dropped);
  number("variance_log_likelihood", d.variance_log_likelihood);
  flag("nu1_at_boundary", d.nu1_at_boundary);
  number("amount_log_likelihood", d.amount_log_likelihood);
  number("amount_days", d.amount_days);
  try {
    m.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Validation, path + ": " + e.what());
  }
  return m;
}

}  // namespace pqpf
