#include "pqpf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include "pqpf/error.hpp"
#include "pqpf/text_io.hpp"

namespace pqpf {

Dataset::Dataset(std::vector<DailyRecord> records) : records_(std::move(records)) {
  std::sort(records_.begin(), records_.end(), [](const DailyRecord& a, const DailyRecord& b) {
    return a.date != b.date ? a.date < b.date : a.site_id < b.site_id;
  });

  std::unordered_map<std::string, Point> registry;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!(r.obs >= 0.0) || !std::isfinite(r.obs) || !(r.fcst >= 0.0) || !std::isfinite(r.fcst)) {
      fail(ErrorKind::Validation, "negative or non-finite accumulation for site " + r.site_id +
                                      " on " + format_date(r.date));
    }
    if (!std::isfinite(r.x_km) || !std::isfinite(r.y_km)) {
      fail(ErrorKind::Validation, "non-finite coordinates for site " + r.site_id);
    }
    if (i > 0 && records_[i - 1].date == r.date && records_[i - 1].site_id == r.site_id) {
      fail(ErrorKind::Validation,
           "duplicate record for site " + r.site_id + " on " + format_date(r.date));
    }
    const auto [it, inserted] = registry.try_emplace(r.site_id, Point{r.x_km, r.y_km});
    if (!inserted && (it->second.x != r.x_km || it->second.y != r.y_km)) {
      fail(ErrorKind::Validation, "site " + r.site_id + " has inconsistent coordinates");
    }
  }

  sites_.reserve(registry.size());
  for (const auto& [id, p] : registry) sites_.push_back(Site{id, p.x, p.y});
  std::sort(sites_.begin(), sites_.end(),
            [](const Site& a, const Site& b) { return a.id < b.id; });

  std::size_t begin = 0;
  for (std::size_t i = 1; i <= records_.size(); ++i) {
    if (i == records_.size() || records_[i].date != records_[begin].date) {
      dates_.push_back(records_[begin].date);
      day_ranges_.emplace(records_[begin].date, std::pair{begin, i});
      begin = i;
    }
  }
}

bool Dataset::has_date(Date d) const noexcept { return day_ranges_.contains(d); }

std::span<const DailyRecord> Dataset::on(Date d) const noexcept {
  const auto it = day_ranges_.find(d);
  if (it == day_ranges_.end()) return {};
  return std::span<const DailyRecord>(records_).subspan(it->second.first,
                                                        it->second.second - it->second.first);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::NotFound, "cannot open dataset " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Parse, path + ":1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kDatasetHeader) {
    fail(ErrorKind::Parse, path + ":1: unexpected header '" + line + "'");
  }
  std::vector<DailyRecord> records;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = path + ":" + std::to_string(number) + ": ";
    const auto fields = split(line, ',');
    if (fields.size() != 6) fail(ErrorKind::Parse, where + "expected 6 fields");
    DailyRecord r;
    r.site_id = std::string(fields[0]);
    if (r.site_id.empty()) fail(ErrorKind::Parse, where + "empty site_id");
    if (!parse_double(fields[1], r.x_km) || !parse_double(fields[2], r.y_km) ||
        !parse_double(fields[4], r.obs) || !parse_double(fields[5], r.fcst)) {
      fail(ErrorKind::Parse, where + "malformed number");
    }
    try {
      r.date = parse_date(fields[3]);
    } catch (const Error& e) {
      fail(ErrorKind::Parse, where + e.what());
    }
    if (r.obs < 0.0 || r.fcst < 0.0) {
      fail(ErrorKind::Validation, where + "negative accumulation");
    }
    records.push_back(std::move(r));
  }
  return Dataset(std::move(records));
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::NotFound, "cannot write dataset " + path);
  out << kDatasetHeader << '\n';
  for (const auto& r : ds.records()) {
    out << r.site_id << ',' << format_decimal(r.x_km) << ',' << format_decimal(r.y_km) << ','
        << format_date(r.date) << ',' << format_decimal(r.obs) << ',' << format_decimal(r.fcst)
        << '\n';
  }
  if (!out) fail(ErrorKind::NotFound, "write failed for " + path);
}

DatasetSummary dataset_summary(const Dataset& ds) {
  if (ds.empty()) fail(ErrorKind::NoData, "dataset is empty");
  DatasetSummary s;
  s.n_pairs = ds.size();
  std::size_t over = 0, nz_fcst = 0, nz_obs = 0;
  double err = 0.0;
  for (const auto& r : ds.records()) {
    over += r.fcst > r.obs;
    nz_fcst += r.fcst > 0.0;
    nz_obs += r.obs > 0.0;
    err += r.fcst - r.obs;
  }
  const auto n = static_cast<double>(s.n_pairs);
  s.over_forecast_fraction = over / n;
  s.mean_error = err / n;
  s.nonzero_forecast_fraction = nz_fcst / n;
  s.nonzero_observation_fraction = nz_obs / n;
  return s;
}

DateSplit split_by_date(const Dataset& ds, Date valid_date) {
  if (!ds.has_date(valid_date)) {
    fail(ErrorKind::NotFound, "date " + format_date(valid_date) + " not present in dataset");
  }
  std::vector<DailyRecord> history, current, future;
  for (const auto& r : ds.records()) {
    if (r.date < valid_date) {
      history.push_back(r);
    } else if (r.date == valid_date) {
      current.push_back(r);
    } else {
      future.push_back(r);
    }
  }
  return {Dataset(std::move(history)), Dataset(std::move(current)), Dataset(std::move(future))};
}

}  // namespace pqpf
