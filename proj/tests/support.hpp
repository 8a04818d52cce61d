#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pqpf/dataset.hpp"
#include "pqpf/estimation.hpp"
#include "pqpf/synth.hpp"

namespace pqpf::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

Date day(int offset);  // 2003-01-01 + offset

// Window holding every date of `ds` (valid date = one day past the last).
TrainingWindow whole_window(const Dataset& ds);

// Single-site-per-day records with the given (obs, fcst) pairs, one per day.
Dataset single_site_days(const std::vector<std::pair<double, double>>& obs_fcst);

}  // namespace pqpf::testing
