#include "pqpf/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pqpf/error.hpp"
#include "pqpf/verification.hpp"

namespace pqpf {
namespace {

enum Stream : std::uint64_t { kFit = 11, kForecast = 12, kScore = 13 };

}  // namespace

DaySeeds seeds_for_date(std::uint64_t master, Date valid_date) {
  const auto d = static_cast<std::uint64_t>(day_number(valid_date));
  return {derive_seed(master, {kFit, d}), derive_seed(master, {kForecast, d}),
          derive_seed(master, {kScore, d})};
}

DayForecast forecast_day(const Dataset& dataset, Date valid_date, int window_days,
                         SemConfig sem, int n_members, std::uint64_t master_seed) {
  const auto seeds = seeds_for_date(master_seed, valid_date);
  sem.seed = seeds.fit;
  DayForecast out;
  out.model = fit_model(make_window(dataset, valid_date, window_days), sem);
  for (const auto& r : dataset.on(valid_date)) {
    out.input.push_back({Site{r.site_id, r.x_km, r.y_km}, r.fcst});
    out.obs.push_back(r.obs);
  }
  if (out.input.empty()) fail(ErrorKind::NotFound, "no records on " + format_date(valid_date));
  out.ensemble = generate_site_ensemble(out.model, out.input, n_members, seeds.forecast);
  return out;
}

std::vector<Date> dates_with_history(const Dataset& dataset, int min_history) {
  const auto& dates = dataset.dates();
  if (min_history < 0 || static_cast<std::size_t>(min_history) >= dates.size()) return {};
  return {dates.begin() + min_history, dates.end()};
}

std::vector<SweepRow> window_sweep(const Dataset& dataset, std::span<const Date> valid_dates,
                                   std::span<const int> window_lengths, const SemConfig& sem,
                                   int n_members, std::uint64_t master_seed) {
  if (window_lengths.empty()) fail(ErrorKind::Domain, "window sweep needs at least one M");
  const int max_m = *std::max_element(window_lengths.begin(), window_lengths.end());
  if (max_m < 1) fail(ErrorKind::Domain, "window lengths must be positive");
  if (valid_dates.empty()) return {};
  const auto& dates = dataset.dates();
  for (const Date d : valid_dates) {
    const auto history = std::lower_bound(dates.begin(), dates.end(), d) - dates.begin();
    if (history < max_m) {
      fail(ErrorKind::InsufficientData, format_date(d) + " has " + std::to_string(history) +
                                            " days of history; M = " + std::to_string(max_m) +
                                            " needs more");
    }
  }

  std::vector<SweepRow> rows;
  for (const int m : window_lengths) {
    SweepRow row;
    row.window_days = m;
    for (const Date d : valid_dates) {
      try {
        const auto day = forecast_day(dataset, d, m, sem, n_members, master_seed);
        for (Eigen::Index j = 0; j < day.ensemble.n_locations(); ++j) {
          const Eigen::VectorXd col = day.ensemble.members.col(j);
          row.case_crps.push_back(
              crps_ensemble(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())),
                            day.obs[static_cast<std::size_t>(j)]));
        }
      } catch (const FitError&) {
        ++row.n_skipped;
      }
    }
    row.n_cases = row.case_crps.size();
    if (row.n_cases > 0) {
      double sum = 0.0;
      for (const double c : row.case_crps) sum += c;
      row.mean_crps = sum / static_cast<double>(row.n_cases);
      if (row.n_cases > 1) {
        double ss = 0.0;
        for (const double c : row.case_crps) ss += (c - row.mean_crps) * (c - row.mean_crps);
        row.standard_error = std::sqrt(ss / static_cast<double>(row.n_cases - 1) /
                                       static_cast<double>(row.n_cases));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace pqpf
