#pragma once

// Rolling fit-and-forecast over valid dates, and the training-window sweep
// built on it.

#include <cstdint>
#include <span>
#include <vector>

#include "pqpf/dataset.hpp"
#include "pqpf/estimation.hpp"
#include "pqpf/forecasting.hpp"

namespace pqpf {

// Per-date seed streams derived from one master seed. The same date always
// gets the same streams whatever else is being run.
struct DaySeeds {
  std::uint64_t fit = 0;
  std::uint64_t forecast = 0;
  std::uint64_t score = 0;
};

DaySeeds seeds_for_date(std::uint64_t master, Date valid_date);

struct DayForecast {
  FittedModel model;
  std::vector<SiteForecast> input;  // the day's sites and NWP forecasts
  std::vector<double> obs;          // matching observations
  ForecastEnsemble ensemble;        // spatial site ensemble
};

// Fits on the M days before `valid_date` and forecasts that day's sites.
DayForecast forecast_day(const Dataset& dataset, Date valid_date, int window_days,
                         SemConfig sem, int n_members, std::uint64_t master_seed);

// Dates whose history holds at least `min_history` distinct days.
std::vector<Date> dates_with_history(const Dataset& dataset, int min_history);

struct SweepRow {
  int window_days = 0;
  double mean_crps = 0.0;
  double standard_error = 0.0;  // of the mean over cases
  std::size_t n_cases = 0;      // (date, site) pairs scored
  std::size_t n_skipped = 0;    // dates whose fit failed
  std::vector<double> case_crps;
};

// Throws InsufficientData when a valid date has fewer than max(M) days of
// history.
std::vector<SweepRow> window_sweep(const Dataset& dataset, std::span<const Date> valid_dates,
                                   std::span<const int> window_lengths, const SemConfig& sem,
                                   int n_members, std::uint64_t master_seed);

}  // namespace pqpf
