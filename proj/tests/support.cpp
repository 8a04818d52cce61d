#include "support.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace pqpf::testing {

TempDir::TempDir(const std::string& tag) {
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  do {
    path_ = base / ("pqpf_" + tag + "_" + std::to_string(rd()));
  } while (std::filesystem::exists(path_));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

Date day(int offset) { return Date{std::chrono::year{2003} / 1 / 1} + std::chrono::days{offset}; }

TrainingWindow whole_window(const Dataset& ds) {
  const auto n = static_cast<int>(ds.dates().size());
  return make_window(ds, ds.dates().back() + std::chrono::days{1}, n);
}

Dataset single_site_days(const std::vector<std::pair<double, double>>& obs_fcst) {
  std::vector<DailyRecord> recs;
  for (std::size_t i = 0; i < obs_fcst.size(); ++i) {
    recs.push_back({"A", 0.0, 0.0, day(static_cast<int>(i)), obs_fcst[i].first, obs_fcst[i].second});
  }
  return Dataset(std::move(recs));
}

}  // namespace pqpf::testing
