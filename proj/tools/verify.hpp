#pragma once

// Rolling verification of the reference and model forecasts over a dataset.

#include <cstdint>
#include <string>
#include <vector>

#include "pqpf/dataset.hpp"
#include "pqpf/estimation.hpp"
#include "pqpf/forecasting.hpp"
#include "pqpf/verification.hpp"

namespace pqpf::cli {

struct VerifySettings {
  int window_days = 30;
  int n_members = kDefaultSiteMembers;
  SemConfig sem;
  std::uint64_t seed = 0;
  std::vector<std::string> multisite_ids;  // energy score / MST sites
};

enum class Method { Climatology, Nwp, Independence, Spatial };
inline constexpr Method kMethods[] = {Method::Climatology, Method::Nwp, Method::Independence,
                                      Method::Spatial};
const char* method_name(Method m);

struct SiteCase {
  Method method{};
  Date date{};
  std::string site_id;
  double obs = 0.0;
  double mae = 0.0;
  double crps = 0.0;
  double brier = 0.0;
  double prob = 0.0;  // forecast probability of precipitation
  double pit = -1.0;  // -1 when not defined for the method
  int rank = 0;       // 0 when not defined
};

struct MultiCase {
  Method method{};
  Date date{};
  double energy = 0.0;
  int mst_rank = 0;
};

struct VerificationReport {
  std::vector<SiteCase> site_cases;
  std::vector<MultiCase> multi_cases;
  std::vector<Date> skipped_dates;
  int n_members = 0;
};

VerificationReport run_verification(const Dataset& dataset, const std::vector<Date>& dates,
                                    const VerifySettings& settings, std::ostream& log);

// scores.csv, summary.csv, rank_hist.csv, pit_hist.csv, mst_hist.csv and
// reliability.csv in `dir`.
void write_report(const VerificationReport& report, const std::string& dir);

}  // namespace pqpf::cli
