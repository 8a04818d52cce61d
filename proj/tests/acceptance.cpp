// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "pqpf/estimation.hpp"
#include "pqpf/forecasting.hpp"
#include "pqpf/random_fields.hpp"
#include "pqpf/sweep.hpp"
#include "pqpf/synth.hpp"
#include "pqpf/verification.hpp"
#include "support.hpp"

using namespace pqpf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::span<const double> column(const Eigen::MatrixXd& m, Eigen::Index j, std::vector<double>& buf) {
  buf.resize(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) buf[static_cast<std::size_t>(i)] = m(i, j);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome scoring_identities() {
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const double p0 = u(gen);
    std::gamma_distribution<double> g(0.5 + 4.0 * u(gen), 0.2 + u(gen));
    std::vector<double> x(20);
    for (auto& v : x) {
      const double y = g(gen);
      v = u(gen) < p0 ? 0.0 : y * y * y;
    }
    const double obs = u(gen) < p0 ? 0.0 : 40.0 * u(gen);
    worst = std::max(worst, std::abs(crps_ensemble(x, obs) - crps_numeric(PredictiveCdf::empirical(x), obs)));
  }
  double es_gap = 0.0;
  bool point_exact = true;
  for (int c = 0; c < 100; ++c) {
    std::vector<double> x(19);
    for (auto& v : x) v = 30.0 * u(gen);
    const double obs = 30.0 * u(gen);
    const Eigen::MatrixXd m = Eigen::Map<const Eigen::VectorXd>(x.data(), 19);
    es_gap = std::max(es_gap, std::abs(energy_score(m, Eigen::VectorXd::Constant(1, obs)) - crps_ensemble(x, obs)));
    point_exact &= crps_ensemble(std::vector<double>{x[0]}, obs) == std::abs(x[0] - obs);
  }
  return {worst < 1e-6 && es_gap <= 1e-12 && point_exact,
          fmt("max |crps_ens - crps_num| = %.2e, max |ES - CRPS| = %.2e, point forecast exact: %s", worst,
              es_gap, point_exact ? "yes" : "no")};
}

// ---------------------------------------------------------------------------

Outcome parameter_recovery() {
  const TrueParameters truth;
  int ok_seeds = 0;
  std::ostringstream misses;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SynthSpec spec;
    spec.seed = seed;
    const auto world = synth_generate(spec);
    SemConfig sem;
    sem.seed = seed;
    const auto fit = fit_model(pqpf::testing::whole_window(world), sem);

    // The occurrence trend is judged on 10^4 pooled pairs.
    SynthSpec pooled = spec;
    pooled.n_days = 200;
    pooled.seed = seed + 1000;
    const auto probit = fit_probit_trend(pqpf::testing::whole_window(synth_generate(pooled)));

    std::vector<std::string> bad;
    auto abs_check = [&](const char* name, double est, double want, double tol) {
      if (!(std::abs(est - want) <= tol)) bad.push_back(fmt("%s=%.3f", name, est));
    };
    auto rel_check = [&](const char* name, double est, double want, double tol) {
      if (!(std::abs(est - want) <= tol * want)) bad.push_back(fmt("%s=%.4g", name, est));
    };
    abs_check("g0", probit.params.gamma0, truth.occurrence.gamma0, 0.07);
    abs_check("g1", probit.params.gamma1, truth.occurrence.gamma1, 0.07);
    abs_check("g2", probit.params.gamma2, truth.occurrence.gamma2, 0.07);
    abs_check("e0", fit.amount.eta0, truth.amount.eta0, 0.05);
    abs_check("e1", fit.amount.eta1, truth.amount.eta1, 0.05);
    abs_check("e2", fit.amount.eta2, truth.amount.eta2, 0.05);
    rel_check("n0", fit.amount.nu0, truth.amount.nu0, 0.20);
    rel_check("n1", fit.amount.nu1, truth.amount.nu1, 0.20);
    rel_check("rho", fit.rho_km, truth.rho_km, 0.30);
    rel_check("r", fit.r_km, truth.r_km, 0.25);
    if (bad.empty()) {
      ++ok_seeds;
    } else {
      misses << " seed " << seed << ":";
      for (const auto& b : bad) misses << ' ' << b;
      misses << ';';
    }
  }
  return {ok_seeds >= 18, fmt("%d/20 seeds within all tolerances", ok_seeds) + misses.str()};
}

// ---------------------------------------------------------------------------

Outcome field_simulation() {
  const GridSpec grid{0.0, 0.0, 1.0, 64, 64};
  const double range = 10.0;
  const CirculantEmbedding ce(grid, ExpCorrelation(range));
  Rng rng(303);
  const int n = 10000;
  const int nx = grid.nx, ny = grid.ny;
  struct Lag {
    int dx, dy;
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::vector<Lag> lags{{1, 0}, {0, 1}, {2, 0}, {0, 4}, {8, 0}, {1, 1}, {3, 4}};
  double sum_sq = 0.0;
  const std::vector<std::size_t> probes{0, 63, 64 * 63, 64 * 64 - 1, 32 * 64 + 32};
  std::vector<double> probe_sq(probes.size(), 0.0);
  for (int k = 0; k < n; ++k) {
    const auto f = ce.sample(rng);
    for (const double v : f) sum_sq += v * v;
    for (std::size_t p = 0; p < probes.size(); ++p) probe_sq[p] += f[probes[p]] * f[probes[p]];
    for (auto& l : lags) {
      for (int r = 0; r + l.dy < ny; ++r)
        for (int c = 0; c + l.dx < nx; ++c) l.sum += f[static_cast<std::size_t>(r * nx + c)] * f[static_cast<std::size_t>((r + l.dy) * nx + c + l.dx)];
      l.count += static_cast<std::size_t>((ny - l.dy) * (nx - l.dx));
    }
  }
  const double var = sum_sq / (static_cast<double>(n) * static_cast<double>(grid.size()));
  double worst_probe = 0.0;
  for (const double s : probe_sq) worst_probe = std::max(worst_probe, std::abs(s / n - 1.0));
  double worst_lag = 0.0;
  for (const auto& l : lags) {
    const double want = std::exp(-std::hypot(l.dx, l.dy) / range);
    worst_lag = std::max(worst_lag, std::abs(l.sum / static_cast<double>(l.count) - want));
  }

  // Dense and FFT paths on a shared 10x10 grid.
  const GridSpec small{0.0, 0.0, 1.0, 10, 10};
  const ExpCorrelation corr(3.0);
  const auto nodes = small.nodes();
  const MvnSampler dense(Eigen::VectorXd::Zero(100), correlation_matrix(nodes, corr));
  const CirculantEmbedding fft(small, corr);
  Rng ra(304), rb(305);
  double dvar = 0, fvar = 0, dlag = 0, flag = 0, dmean = 0, fmean = 0;
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd d = dense.sample(ra);
    const auto f = fft.sample(rb);
    for (int i = 0; i < 100; ++i) {
      dmean += d[i];
      fmean += f[static_cast<std::size_t>(i)];
      dvar += d[i] * d[i];
      fvar += f[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(i)];
      if (i % 10 < 9) {
        dlag += d[i] * d[i + 1];
        flag += f[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(i + 1)];
      }
    }
  }
  const double cells = 100.0 * n, pairs = 90.0 * n;
  const double gap = std::max({std::abs(dmean - fmean) / cells, std::abs(dvar - fvar) / cells,
                               std::abs(dlag - flag) / pairs});

  return {std::abs(var - 1.0) <= 0.05 && worst_probe <= 0.05 && worst_lag <= 0.02 && gap <= 0.03,
          fmt("64x64 grid variance %.4f, worst probe-cell variance error %.4f, worst lag-correlation "
              "error %.4f; 10x10 dense vs FFT gap %.4f",
              var, worst_probe, worst_lag, gap)};
}

// ---------------------------------------------------------------------------

Outcome truncated_mvn() {
  TruncatedMvnGibbs gibbs(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), {Orthant::Positive});
  Rng rng(404);
  const int n = 100000;
  double sum = 0.0;
  bool inside = true;
  for (int i = 0; i < n; ++i) {
    gibbs.sweep(rng);
    sum += gibbs.state()[0];
    inside &= gibbs.state()[0] > 0.0;
  }
  const double mean = sum / n;
  const double want = std::sqrt(2.0 / std::numbers::pi);
  return {std::abs(mean - want) <= 0.01 && inside,
          fmt("mean %.5f vs %.5f over %d draws", mean, want, n)};
}

// ---------------------------------------------------------------------------

Outcome calibration() {
  SynthSpec train;
  train.seed = 505;
  SemConfig sem;
  sem.seed = 506;
  const auto model = fit_model(pqpf::testing::whole_window(synth_generate(train)), sem);

  SynthSpec days;
  days.seed = 507;
  days.n_days = 100;
  const auto world = synth_generate(days);
  const int m = 19;
  Rng score(508);
  std::vector<int> ranks;
  std::vector<double> pits;
  std::size_t zero_obs = 0;
  std::vector<double> buf;
  for (std::size_t d = 0; d < world.dates().size(); ++d) {
    std::vector<SiteForecast> input;
    for (const auto& r : world.on(world.dates()[d])) input.push_back({Site{r.site_id, r.x_km, r.y_km}, r.fcst});
    const auto ens = generate_site_ensemble(model, input, m, derive_seed(509, {d}));
    const auto truth = generate_site_ensemble(model, input, 1, derive_seed(510, {d}));
    for (std::size_t j = 0; j < input.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double obs = truth.members(0, jj);
      zero_obs += obs == 0.0;
      ranks.push_back(verification_rank(column(ens.members, jj, buf), obs, score));
      const auto marg = site_marginal(model, input[j].fcst);
      pits.push_back(pit_value(marg.p0, marg.gamma, obs, score));
    }
  }
  const auto rh = rank_histogram(ranks, m);
  const auto ph = pit_histogram(pits);
  const double rc = chi_square_statistic(rh), pc = chi_square_statistic(ph);
  const double rcrit = chi_square_critical(rh.size()), pcrit = chi_square_critical(ph.size());
  return {rc < rcrit && pc < pcrit,
          fmt("%zu cases (%zu zero observations); rank chi2 %.2f < %.2f, PIT chi2 %.2f < %.2f", ranks.size(),
              zero_obs, rc, rcrit, pc, pcrit)};
}

// ---------------------------------------------------------------------------

Outcome spatial_value() {
  SynthSpec train;
  train.seed = 606;
  SemConfig sem;
  sem.seed = 607;
  const auto model = fit_model(pqpf::testing::whole_window(synth_generate(train)), sem);

  SynthSpec close;
  close.seed = 608;
  close.n_days = 100;
  close.sites = {{"N1", 100.0, 100.0}, {"N2", 103.0, 101.0}, {"N3", 101.0, 104.0}, {"N4", 98.0, 102.5}};
  const auto world = synth_generate(close);

  const int m = 19;
  Rng rng(609);
  double es_spatial = 0.0, es_indep = 0.0;
  std::vector<int> mst_spatial, mst_indep;
  for (std::size_t d = 0; d < world.dates().size(); ++d) {
    std::vector<SiteForecast> input;
    Eigen::VectorXd obs(4);
    Eigen::Index j = 0;
    for (const auto& r : world.on(world.dates()[d])) {
      input.push_back({Site{r.site_id, r.x_km, r.y_km}, r.fcst});
      obs[j++] = r.obs;
    }
    const auto sp = generate_site_ensemble(model, input, m, derive_seed(610, {d}));
    const auto in = independence_baseline_ensemble(model, input, m, derive_seed(610, {d}));
    es_spatial += energy_score(sp.members, obs);
    es_indep += energy_score(in.members, obs);
    mst_spatial.push_back(mst_rank(sp.members, obs, rng));
    mst_indep.push_back(mst_rank(in.members, obs, rng));
  }
  const double n = static_cast<double>(world.dates().size());
  const auto hs = rank_histogram(mst_spatial, m), hi = rank_histogram(mst_indep, m);
  const double cs = chi_square_statistic(hs), ci = chi_square_statistic(hi);
  const double crit = chi_square_critical(hs.size());
  return {es_spatial < es_indep && cs < crit && ci >= crit,
          fmt("mean ES spatial %.3f vs independent %.3f; MST chi2 spatial %.2f, independent %.2f, "
              "critical %.2f",
              es_spatial / n, es_indep / n, cs, ci, crit)};
}

// ---------------------------------------------------------------------------

Outcome window_sweep_shape() {
  SynthSpec spec;
  spec.seed = 707;
  spec.n_sites = 30;
  spec.n_days = 70;
  const auto ds = synth_generate(spec);
  const auto dates = dates_with_history(ds, 30);
  const std::vector<int> windows{10, 30};
  const auto rows = window_sweep(ds, dates, windows, SemConfig{}, kDefaultSiteMembers, 708);
  const auto& m10 = rows.at(0);
  const auto& m30 = rows.at(1);
  return {m30.mean_crps <= m10.mean_crps + m10.standard_error,
          fmt("mean CRPS M=30 %.4f vs M=10 %.4f + s.e. %.4f over %zu cases (%zu/%zu dates skipped)",
              m30.mean_crps, m10.mean_crps, m10.standard_error, m30.n_cases, m10.n_skipped,
              m30.n_skipped)};
}

// ---------------------------------------------------------------------------

Outcome round_trips() {
  std::mt19937_64 gen(808);
  std::uniform_real_distribution<double> la(std::log(0.1), std::log(30.0));
  double worst_z = 0.0;
  for (int i = 0; i < 100; ++i) {
    const GammaMarginal g{std::exp(la(gen)), std::exp(la(gen))};
    for (double z = -5.0; z <= 5.0 + 1e-12; z += 0.05) {
      worst_z = std::max(worst_z, std::abs(anamorphosis_inverse(anamorphosis(z, g), g) - z));
    }
  }
  std::uniform_real_distribution<double> ly(-6.0, 6.0);
  double worst_rel = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double y0 = std::pow(10.0, ly(gen));
    worst_rel = std::max(worst_rel, std::abs(cube(cube_root(Accumulation(y0))).value() - y0) / y0);
  }
  return {worst_z <= 1e-8 && worst_rel <= 1e-9,
          fmt("anamorphosis round trip max error %.2e, cube-root round trip max relative error %.2e", worst_z,
              worst_rel)};
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> run_every_command(const pqpf::testing::TempDir& out, const std::string& data) {
  std::ostringstream log;
  const auto dir = out.path().string();
  const std::vector<std::vector<std::string>> commands{
      {"pqpf", "synth", "--seed", "909", "--out", dir, "--n-sites", "8", "--n-days", "20"},
      {"pqpf", "fit", "--seed", "3", "--data", data, "--valid-date", "2003-01-18", "--window-days", "15", "--out", dir},
      {"pqpf", "forecast", "--seed", "3", "--model", out.file("model.txt"), "--data", data, "--valid-date",
       "2003-01-18", "--out", dir},
      {"pqpf", "forecast", "--seed", "3", "--model", out.file("model.txt"), "--data", data, "--valid-date",
       "2003-01-18", "--mode", "areal", "--out", dir},
      {"pqpf", "verify", "--seed", "3", "--data", data, "--window-days", "15", "--out", dir},
      {"pqpf", "sweep", "--seed", "3", "--data", data, "--windows", "10,15", "--out", dir},
  };
  for (const auto& c : commands) {
    if (cli::run(c, log) != 0) throw std::runtime_error("command failed: " + c[1] + "\n" + log.str());
  }
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(out.path())) {
    files[e.path().filename().string()] = pqpf::testing::read_file(e.path().string());
  }
  return files;
}

Outcome determinism() {
  pqpf::testing::TempDir base("acc_world"), a("acc_a"), b("acc_b");
  std::ostringstream log;
  if (cli::run({"pqpf", "synth", "--seed", "909", "--out", base.path().string(), "--n-sites", "8", "--n-days", "20"}, log) != 0) {
    return {false, "synth failed: " + log.str()};
  }
  const auto data = base.file("dataset.csv");
  const auto fa = run_every_command(a, data);
  const auto fb = run_every_command(b, data);
  std::size_t differing = 0;
  for (const auto& [name, text] : fa) differing += !fb.count(name) || fb.at(name) != text;
  return {fa.size() == fb.size() && differing == 0 && fa.size() >= 12,
          fmt("%zu output files across synth, fit, forecast (site, areal), verify, sweep; %zu differ", fa.size(),
              differing)};
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    double budget_s;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {"scoring-rule identities", 10, scoring_identities},
      {"parameter recovery", 300, parameter_recovery},
      {"field simulation", 120, field_simulation},
      {"truncated MVN", 30, truncated_mvn},
      {"calibration under the model", 120, calibration},
      {"spatial value", 180, spatial_value},
      {"window sweep shape", 600, window_sweep_shape},
      {"transform round trips", 5, round_trips},
      {"CLI determinism", 60, determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > criteria[i].budget_s) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", criteria[i].budget_s);
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].name << ", "
              << fmt("%.1f s", secs) << "): " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
