#include "verify.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>

#include "pqpf/error.hpp"
#include "pqpf/forecasting.hpp"
#include "pqpf/sweep.hpp"
#include "pqpf/text_io.hpp"

namespace pqpf::cli {
namespace {

std::span<const double> column_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::NotFound, "cannot write " + path);
  return out;
}

bool has_ensemble_ranks(Method m) { return m == Method::Independence || m == Method::Spatial; }

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::Climatology: return "climatology";
    case Method::Nwp: return "nwp";
    case Method::Independence: return "independence";
    case Method::Spatial: return "spatial";
  }
  return "?";
}

VerificationReport run_verification(const Dataset& dataset, const std::vector<Date>& dates,
                                    const VerifySettings& s, std::ostream& log) {
  VerificationReport report;
  report.n_members = s.n_members;

  for (const Date date : dates) {
    const auto seeds = seeds_for_date(s.seed, date);
    DayForecast day;
    try {
      day = forecast_day(dataset, date, s.window_days, s.sem, s.n_members, s.seed);
    } catch (const FitError& e) {
      log << "verify: " << format_date(date) << " skipped (" << e.stage() << ": " << e.what() << ")\n";
      report.skipped_dates.push_back(date);
      continue;
    }
    const auto indep = independence_baseline_ensemble(day.model, day.input, s.n_members, seeds.forecast);
    const auto window = make_window(dataset, date, s.window_days);

    std::vector<double> history;
    for (const auto& r : window.data.records()) history.push_back(r.obs);
    const auto clim = EmpiricalClimatology::pooled(history);
    double clim_prob = 0.0;
    for (const double v : history) clim_prob += v > 0.0;
    clim_prob /= static_cast<double>(history.size());

    const auto n_sites = day.input.size();
    for (const Method method : kMethods) {
      Rng rng(derive_seed(seeds.score, {static_cast<std::uint64_t>(method)}));
      for (std::size_t j = 0; j < n_sites; ++j) {
        const double obs = day.obs[j];
        const double fcst = day.input[j].fcst;
        SiteCase c;
        c.method = method;
        c.date = date;
        c.site_id = day.input[j].site.id;
        c.obs = obs;
        const auto marginal = site_marginal(day.model, fcst);
        switch (method) {
          case Method::Climatology: {
            c.mae = mae_of_median(clim.values(), obs);
            c.crps = crps_ensemble(clim.values(), obs);
            c.prob = clim_prob;
            c.pit = pit_empirical(clim.values(), obs, rng);
            break;
          }
          case Method::Nwp: {
            const double point[1] = {fcst};
            c.mae = mae_of_median(point, obs);
            c.crps = crps_ensemble(point, obs);
            c.prob = fcst > 0.0 ? 1.0 : 0.0;
            break;
          }
          case Method::Independence:
          case Method::Spatial: {
            const auto& ens = method == Method::Spatial ? day.ensemble : indep;
            const Eigen::VectorXd col = ens.members.col(static_cast<Eigen::Index>(j));
            c.mae = mae_of_median(column_span(col), obs);
            c.crps = crps_ensemble(column_span(col), obs);
            c.prob = 1.0 - marginal.p0;
            c.rank = verification_rank(column_span(col), obs, rng);
            c.pit = pit_value(marginal.p0, marginal.gamma, obs, rng);
            break;
          }
        }
        c.brier = brier_score(c.prob, obs > 0.0);
        report.site_cases.push_back(std::move(c));
      }

      // Multi-site scores over the configured subset.
      if (s.multisite_ids.empty()) continue;
      std::vector<Eigen::Index> cols;
      for (const auto& id : s.multisite_ids) {
        for (std::size_t j = 0; j < n_sites; ++j) {
          if (day.input[j].site.id == id) cols.push_back(static_cast<Eigen::Index>(j));
        }
      }
      if (cols.size() != s.multisite_ids.size()) continue;
      const auto k = static_cast<Eigen::Index>(cols.size());
      Eigen::VectorXd obs(k);
      for (Eigen::Index i = 0; i < k; ++i) obs[i] = day.obs[static_cast<std::size_t>(cols[static_cast<std::size_t>(i)])];
      Eigen::MatrixXd members;
      switch (method) {
        case Method::Climatology: {
          std::vector<Eigen::VectorXd> rows;
          for (const Date d : window.data.dates()) {
            const auto recs = window.data.on(d);
            Eigen::VectorXd row(k);
            Eigen::Index found = 0;
            for (Eigen::Index i = 0; i < k; ++i) {
              for (const auto& r : recs) {
                if (r.site_id == s.multisite_ids[static_cast<std::size_t>(i)]) {
                  row[i] = r.obs;
                  ++found;
                }
              }
            }
            if (found == k) rows.push_back(row);
          }
          if (rows.empty()) continue;
          Eigen::MatrixXd tuples(static_cast<Eigen::Index>(rows.size()), k);
          for (std::size_t r = 0; r < rows.size(); ++r) tuples.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
          members = climatology_forecast(EmpiricalClimatology::joint(std::move(tuples)));
          break;
        }
        case Method::Nwp: {
          members.resize(1, k);
          for (Eigen::Index i = 0; i < k; ++i) members(0, i) = day.input[static_cast<std::size_t>(cols[static_cast<std::size_t>(i)])].fcst;
          break;
        }
        case Method::Independence:
        case Method::Spatial: {
          const auto& ens = method == Method::Spatial ? day.ensemble : indep;
          members.resize(ens.n_members(), k);
          for (Eigen::Index i = 0; i < k; ++i) members.col(i) = ens.members.col(cols[static_cast<std::size_t>(i)]);
          break;
        }
      }
      MultiCase mc;
      mc.method = method;
      mc.date = date;
      mc.energy = energy_score(members, obs);
      if (has_ensemble_ranks(method)) mc.mst_rank = mst_rank(members, obs, rng);
      report.multi_cases.push_back(mc);
    }
    log << "verify: " << format_date(date) << " scored " << n_sites << " sites\n";
  }
  return report;
}

void write_report(const VerificationReport& report, const std::string& dir) {
  auto scores = open_out(dir + "/scores.csv");
  scores << "method,date,site_id,obs_hundredths,mae,crps,brier,pit,rank,energy,mst_rank\n";
  for (const auto& c : report.site_cases) {
    scores << method_name(c.method) << ',' << format_date(c.date) << ',' << c.site_id << ','
           << format_decimal(c.obs) << ',' << format_decimal(c.mae) << ',' << format_decimal(c.crps)
           << ',' << format_decimal(c.brier) << ',' << (c.pit >= 0.0 ? format_decimal(c.pit) : "")
           << ',' << (c.rank > 0 ? std::to_string(c.rank) : "") << ",,\n";
  }
  for (const auto& c : report.multi_cases) {
    scores << method_name(c.method) << ',' << format_date(c.date) << ",multisite,,,,,,,"
           << format_decimal(c.energy) << ',' << (c.mst_rank > 0 ? std::to_string(c.mst_rank) : "")
           << '\n';
  }

  auto summary = open_out(dir + "/summary.csv");
  summary << "method,n_cases,mae,crps,brier,n_multisite,energy,rank_chi2,pit_chi2,mst_chi2,"
             "n_skipped_dates\n";
  auto ranks = open_out(dir + "/rank_hist.csv");
  ranks << "method,rank,count\n";
  auto pits = open_out(dir + "/pit_hist.csv");
  pits << "method,bin_lower,bin_upper,count\n";
  auto msts = open_out(dir + "/mst_hist.csv");
  msts << "method,rank,count\n";
  auto rel = open_out(dir + "/reliability.csv");
  rel << "method,bin_center,mean_prob,observed_freq,count\n";

  auto chi_text = [](const std::vector<std::size_t>& counts) {
    std::size_t total = 0;
    for (const auto c : counts) total += c;
    return total > 0 ? format_decimal(chi_square_statistic(counts)) : std::string();
  };

  for (const Method m : kMethods) {
    std::size_t n = 0;
    double mae = 0.0, crps = 0.0, brier = 0.0;
    std::vector<int> rank_values;
    std::vector<double> pit_values, probs;
    std::vector<bool> outcomes;
    for (const auto& c : report.site_cases) {
      if (c.method != m) continue;
      ++n;
      mae += c.mae;
      crps += c.crps;
      brier += c.brier;
      if (c.rank > 0) rank_values.push_back(c.rank);
      if (c.pit >= 0.0) pit_values.push_back(c.pit);
      probs.push_back(c.prob);
      outcomes.push_back(c.obs > 0.0);
    }
    std::size_t n_multi = 0;
    double energy = 0.0;
    std::vector<int> mst_values;
    for (const auto& c : report.multi_cases) {
      if (c.method != m) continue;
      ++n_multi;
      energy += c.energy;
      if (c.mst_rank > 0) mst_values.push_back(c.mst_rank);
    }
    auto mean = [](double sum, std::size_t k) { return k > 0 ? format_decimal(sum / static_cast<double>(k)) : std::string(); };

    std::string rank_chi, pit_chi, mst_chi;
    if (has_ensemble_ranks(m)) {
      const auto rh = rank_histogram(rank_values, report.n_members);
      for (std::size_t b = 0; b < rh.size(); ++b) ranks << method_name(m) << ',' << b + 1 << ',' << rh[b] << '\n';
      rank_chi = chi_text(rh);
      const auto mh = rank_histogram(mst_values, report.n_members);
      for (std::size_t b = 0; b < mh.size(); ++b) msts << method_name(m) << ',' << b + 1 << ',' << mh[b] << '\n';
      mst_chi = chi_text(mh);
    }
    if (m != Method::Nwp) {
      const auto ph = pit_histogram(pit_values);
      const double width = 1.0 / static_cast<double>(ph.size());
      for (std::size_t b = 0; b < ph.size(); ++b) {
        pits << method_name(m) << ',' << format_decimal(static_cast<double>(b) * width) << ','
             << format_decimal(static_cast<double>(b + 1) * width) << ',' << ph[b] << '\n';
      }
      pit_chi = chi_text(ph);
    }
    for (const auto& bin : reliability_table(probs, outcomes)) {
      rel << method_name(m) << ',' << format_decimal(bin.center) << ','
          << (bin.count ? format_decimal(bin.mean_prob) : "") << ','
          << (bin.count ? format_decimal(bin.observed_freq) : "") << ',' << bin.count << '\n';
    }
    summary << method_name(m) << ',' << n << ',' << mean(mae, n) << ',' << mean(crps, n) << ','
            << mean(brier, n) << ',' << n_multi << ',' << mean(energy, n_multi) << ',' << rank_chi
            << ',' << pit_chi << ',' << mst_chi << ',' << report.skipped_dates.size() << '\n';
  }
}

}  // namespace pqpf::cli
