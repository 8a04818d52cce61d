#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pqpf/date.hpp"
#include "pqpf/random_fields.hpp"

namespace pqpf {

// One forecast/observation pair. Accumulations in hundredths of an inch.
struct DailyRecord {
  std::string site_id;
  double x_km = 0.0;
  double y_km = 0.0;
  Date date{};
  double obs = 0.0;
  double fcst = 0.0;

  bool operator==(const DailyRecord&) const = default;
};

// Validated collection of records in canonical (date, site_id) order.
class Dataset {
 public:
  Dataset() = default;
  // Throws Error(Validation) on negative or non-finite accumulations,
  // duplicate (site, date) pairs or inconsistent site coordinates.
  explicit Dataset(std::vector<DailyRecord> records);

  std::span<const DailyRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  // Sorted by site id.
  const std::vector<Site>& sites() const noexcept { return sites_; }
  // Ascending, unique.
  const std::vector<Date>& dates() const noexcept { return dates_; }
  bool has_date(Date d) const noexcept;
  // Records of one day, ordered by site id. Empty if the date is absent.
  std::span<const DailyRecord> on(Date d) const noexcept;

 private:
  std::vector<DailyRecord> records_;
  std::vector<Site> sites_;
  std::vector<Date> dates_;
  std::map<Date, std::pair<std::size_t, std::size_t>> day_ranges_;
};

inline constexpr const char* kDatasetHeader =
    "site_id,x_km,y_km,date,obs_hundredths,fcst_hundredths";

// Throws Error(Parse) with the line number for malformed rows and
// Error(Validation) for invariant violations.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

struct DatasetSummary {
  std::size_t n_pairs = 0;
  double over_forecast_fraction = 0.0;  // fcst > obs, strictly
  double mean_error = 0.0;              // mean of fcst - obs
  double nonzero_forecast_fraction = 0.0;
  double nonzero_observation_fraction = 0.0;
};

DatasetSummary dataset_summary(const Dataset& ds);

struct DateSplit {
  Dataset history;  // strictly before the date
  Dataset current;  // on the date
  Dataset future;   // after the date; together the three partition the input
};

DateSplit split_by_date(const Dataset& ds, Date valid_date);

}  // namespace pqpf
