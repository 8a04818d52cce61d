#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "inputs.hpp"
#include "pqpf/dataset.hpp"
#include "pqpf/error.hpp"
#include "pqpf/estimation.hpp"
#include "pqpf/forecasting.hpp"
#include "pqpf/sweep.hpp"
#include "pqpf/synth.hpp"
#include "pqpf/text_io.hpp"
#include "verify.hpp"

namespace pqpf::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string output_dir(const std::string& dir) {
  std::error_code ec;
  if (dir.empty() || !std::filesystem::is_directory(dir, ec)) {
    throw UsageError("output directory does not exist: " + (dir.empty() ? "<empty>" : dir));
  }
  return dir;
}

Date date_arg(const std::string& text, const char* flag) {
  try {
    return parse_date(text);
  } catch (const Error& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

// `key = value` lines of a config file become `--key=value` arguments placed
// before the command-line ones, so explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (a.rfind("--config=", 0) == 0) path = a.substr(9);
  }
  if (path.empty() || args.size() < 2) return args;
  KeyValues kv;
  try {
    kv = read_key_values(path);
  } catch (const Error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  std::vector<std::string> out(args.begin(), args.begin() + 2);
  for (const auto& [key, value] : kv) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (flag == "config") throw UsageError("config: nested config files are not supported");
    out.push_back("--" + flag + "=" + value);
  }
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

struct SemOptions {
  int iterations = 50;
  int burn_in = 10;
  int sweeps = 100;

  void add(CLI::App* app) {
    app->add_option("--sem-iterations", iterations, "Stochastic EM iterations")->capture_default_str();
    app->add_option("--sem-burn-in", burn_in, "Stochastic EM burn-in iterations")->capture_default_str();
    app->add_option("--gibbs-sweeps", sweeps, "Gibbs sweeps per E-step")->capture_default_str();
  }
  SemConfig config() const {
    SemConfig c;
    c.n_iterations = iterations;
    c.n_burn_iterations = burn_in;
    c.gibbs_sweeps = sweeps;
    c.validate();
    return c;
  }
};

std::vector<Date> select_dates(const Dataset& ds, int min_history, const std::string& first,
                               const std::string& last) {
  auto dates = dates_with_history(ds, min_history);
  if (!first.empty()) {
    const Date f = date_arg(first, "--first-date");
    std::erase_if(dates, [&](Date d) { return d < f; });
  }
  if (!last.empty()) {
    const Date l = date_arg(last, "--last-date");
    std::erase_if(dates, [&](Date d) { return d > l; });
  }
  return dates;
}

// ---------------------------------------------------------------------------

struct SynthCommand {
  std::uint64_t seed = 0;
  std::string out;
  SynthSpec spec;
  std::string layout = "uniform";
  std::string start = "2003-01-01";
  int grid_nx = 0;
  int grid_ny = 0;
  double grid_cell_km = 10.0;
  double grid_origin_x = 0.0;
  double grid_origin_y = 0.0;

  void add(CLI::App* app) {
    auto& t = spec.truth;
    app->add_option("--seed", seed, "Master seed")->required();
    app->add_option("--out", out, "Output directory (must exist)")->required();
    app->add_option("--n-sites", spec.n_sites)->capture_default_str();
    app->add_option("--box-km", spec.box_km)->capture_default_str();
    app->add_option("--layout", layout)->check(CLI::IsMember({"uniform", "clustered"}))->capture_default_str();
    app->add_option("--n-days", spec.n_days)->capture_default_str();
    app->add_option("--start-date", start)->capture_default_str();
    app->add_option("--gamma0", t.occurrence.gamma0)->capture_default_str();
    app->add_option("--gamma1", t.occurrence.gamma1)->capture_default_str();
    app->add_option("--gamma2", t.occurrence.gamma2)->capture_default_str();
    app->add_option("--rho-km", t.rho_km)->capture_default_str();
    app->add_option("--eta0", t.amount.eta0)->capture_default_str();
    app->add_option("--eta1", t.amount.eta1)->capture_default_str();
    app->add_option("--eta2", t.amount.eta2)->capture_default_str();
    app->add_option("--nu0", t.amount.nu0)->capture_default_str();
    app->add_option("--nu1", t.amount.nu1)->capture_default_str();
    app->add_option("--r-km", t.r_km)->capture_default_str();
    app->add_option("--fcst-range-km", spec.forecast.range_km)->capture_default_str();
    app->add_option("--fcst-wet-fraction", spec.forecast.wet_fraction)->capture_default_str();
    app->add_option("--fcst-max-cube-root", spec.forecast.max_cube_root)->capture_default_str();
    app->add_option("--wet-bias", spec.wet_bias)->capture_default_str();
    app->add_option("--grid-nx", grid_nx, "Grid-node layout (0 = scattered sites)");
    app->add_option("--grid-ny", grid_ny);
    app->add_option("--grid-cell-km", grid_cell_km);
    app->add_option("--grid-origin-x", grid_origin_x);
    app->add_option("--grid-origin-y", grid_origin_y);
  }

  int run(std::ostream& log) {
    const auto dir = output_dir(out);
    spec.seed = seed;
    spec.layout = layout == "clustered" ? SiteLayout::Clustered : SiteLayout::Uniform;
    spec.start_date = date_arg(start, "--start-date");
    if (grid_nx > 0 || grid_ny > 0) {
      spec.grid = GridSpec{grid_origin_x, grid_origin_y, grid_cell_km, grid_nx, grid_ny};
    }
    try {
      spec.validate();
    } catch (const Error& e) {
      throw UsageError(std::string("invalid synthetic spec: ") + e.what());
    }
    const auto ds = synth_generate(spec);
    save_dataset(ds, dir + "/dataset.csv");
    const auto& t = spec.truth;
    write_key_values(dir + "/truth.txt", {
        {"seed", std::to_string(seed)},
        {"n_sites", std::to_string(ds.sites().size())},
        {"n_days", std::to_string(spec.n_days)},
        {"start_date", format_date(spec.start_date)},
        {"gamma0", format_precise(t.occurrence.gamma0)},
        {"gamma1", format_precise(t.occurrence.gamma1)},
        {"gamma2", format_precise(t.occurrence.gamma2)},
        {"rho_km", format_precise(t.rho_km)},
        {"eta0", format_precise(t.amount.eta0)},
        {"eta1", format_precise(t.amount.eta1)},
        {"eta2", format_precise(t.amount.eta2)},
        {"nu0", format_precise(t.amount.nu0)},
        {"nu1", format_precise(t.amount.nu1)},
        {"r_km", format_precise(t.r_km)},
        {"wet_bias", format_precise(spec.wet_bias)},
    });
    log << "synth: wrote " << ds.size() << " records for " << ds.sites().size() << " sites to "
        << dir << "\n";
    return kSuccess;
  }
};

struct FitCommand {
  std::uint64_t seed = 0;
  std::string out;
  std::string data;
  std::string valid_date;
  int window_days = 30;
  SemOptions sem;

  void add(CLI::App* app) {
    app->add_option("--seed", seed, "Master seed")->required();
    app->add_option("--out", out, "Output directory (must exist)")->required();
    app->add_option("--data", data, "Dataset CSV")->required();
    app->add_option("--valid-date", valid_date, "Forecast valid date (YYYY-MM-DD)")->required();
    app->add_option("--window-days", window_days, "Training window length M")
        ->check(CLI::PositiveNumber)->capture_default_str();
    sem.add(app);
  }

  int run(std::ostream& log) {
    const auto dir = output_dir(out);
    const Date date = date_arg(valid_date, "--valid-date");
    auto config = sem.config();
    config.seed = seeds_for_date(seed, date).fit;
    const auto ds = load_dataset(data);
    const auto window = make_window(ds, date, window_days);
    if (window.short_window) {
      log << "fit: only " << window.data.dates().size() << " of " << window_days
          << " training days available\n";
    }
    const auto model = fit_model(window, config);
    save_model(model, dir + "/model.txt");
    log << "fit: rho_km " << model.rho_km << ", r_km " << model.r_km << "; wrote " << dir
        << "/model.txt\n";
    return kSuccess;
  }
};

struct ForecastCommand {
  std::uint64_t seed = 0;
  std::string out;
  std::string model_path;
  std::string mode = "site";
  int members = 0;
  std::string forecasts;
  std::string data;
  std::string valid_date;
  std::string sites;
  std::string subset;
  std::string grid_forecast;
  GridSpec grid;

  void add(CLI::App* app) {
    app->add_option("--seed", seed, "Master seed")->required();
    app->add_option("--out", out, "Output directory (must exist)")->required();
    app->add_option("--model", model_path, "Fitted model file")->required();
    app->add_option("--mode", mode)->check(CLI::IsMember({"site", "grid", "areal"}))->capture_default_str();
    app->add_option("--members", members, "Ensemble size (default 19 site, 50 grid, 10000 areal)");
    app->add_option("--forecasts", forecasts, "Site forecasts CSV: site_id,x_km,y_km,fcst_hundredths");
    app->add_option("--data", data, "Dataset CSV; with --valid-date, that day's sites and forecasts");
    app->add_option("--valid-date", valid_date);
    app->add_option("--sites", sites, "Target sites CSV for a gridded forecast: site_id,x_km,y_km");
    app->add_option("--subset", subset, "Comma-separated site ids to keep");
    app->add_option("--grid-forecast", grid_forecast, "Gridded forecast CSV: row,col,fcst_hundredths");
    app->add_option("--grid-nx", grid.nx);
    app->add_option("--grid-ny", grid.ny);
    app->add_option("--grid-cell-km", grid.cell_km);
    app->add_option("--grid-origin-x", grid.origin_x);
    app->add_option("--grid-origin-y", grid.origin_y);
  }

  std::vector<SiteForecast> site_input() const {
    const int sources = !forecasts.empty() + !data.empty() + !grid_forecast.empty();
    if (sources != 1) {
      throw UsageError("site input needs exactly one of --forecasts, --data with --valid-date, "
                       "or --grid-forecast with --sites");
    }
    std::vector<SiteForecast> input;
    if (!forecasts.empty()) {
      input = read_site_forecasts(forecasts);
    } else if (!data.empty()) {
      if (valid_date.empty()) throw UsageError("--data needs --valid-date");
      const Date d = date_arg(valid_date, "--valid-date");
      const auto ds = load_dataset(data);
      for (const auto& r : ds.on(d)) input.push_back({Site{r.site_id, r.x_km, r.y_km}, r.fcst});
      if (input.empty()) fail(ErrorKind::NotFound, "no records on " + valid_date + " in " + data);
    } else {
      if (sites.empty()) throw UsageError("--grid-forecast in " + mode + " mode needs --sites");
      const auto targets = read_sites(sites);
      input = interpolate_to_sites(read_grid_forecast(grid_forecast, grid), targets);
    }
    if (!subset.empty()) {
      std::vector<SiteForecast> kept;
      for (const auto id : split(subset, ',')) {
        const auto it = std::find_if(input.begin(), input.end(),
                                     [&](const SiteForecast& s) { return s.site.id == trim(id); });
        if (it == input.end()) throw UsageError("--subset: unknown site " + std::string(trim(id)));
        kept.push_back(*it);
      }
      input = std::move(kept);
    }
    return input;
  }

  int run(std::ostream& log) {
    const auto dir = output_dir(out);
    if (members < 0) throw UsageError("--members must be positive");
    const auto model = load_model(model_path);

    if (mode == "grid") {
      if (grid_forecast.empty() || !forecasts.empty() || !data.empty() || !sites.empty()) {
        throw UsageError("grid mode takes --grid-forecast and the grid geometry only");
      }
      const int n = members > 0 ? members : kDefaultGridMembers;
      const auto ens = generate_grid_ensemble(model, read_grid_forecast(grid_forecast, grid), n, seed);
      const auto paths = write_grid_ensemble_csv(ens, dir + "/grid_member_");
      log << "forecast: wrote " << paths.size() << " grid members to " << dir << "\n";
      return kSuccess;
    }

    const auto input = site_input();
    if (mode == "areal") {
      const int n = members > 0 ? members : kDefaultArealMembers;
      const auto values = areal_ensemble(model, input, n, seed);
      write_scalar_ensemble_csv(values, dir + "/areal.csv");
      log << "forecast: wrote " << values.size() << " areal members to " << dir << "/areal.csv\n";
      return kSuccess;
    }
    const int n = members > 0 ? members : kDefaultSiteMembers;
    const auto ens = generate_site_ensemble(model, input, n, seed);
    for (const auto j : ens.fallback_locations) {
      log << "forecast: site " << ens.sites[j].id << " used the fallback Gamma mean\n";
    }
    write_site_ensemble_csv(ens, dir + "/ensemble.csv");
    log << "forecast: wrote " << n << " members x " << ens.n_locations() << " sites to " << dir
        << "/ensemble.csv\n";
    return kSuccess;
  }
};

struct VerifyCommand {
  std::uint64_t seed = 0;
  std::string out;
  std::string data;
  int window_days = 30;
  int members = kDefaultSiteMembers;
  std::string first_date;
  std::string last_date;
  std::string multisite;
  int multisite_count = 4;
  SemOptions sem;

  void add(CLI::App* app) {
    app->add_option("--seed", seed, "Master seed")->required();
    app->add_option("--out", out, "Output directory (must exist)")->required();
    app->add_option("--data", data, "Dataset CSV")->required();
    app->add_option("--window-days", window_days)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--members", members)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--first-date", first_date);
    app->add_option("--last-date", last_date);
    app->add_option("--multisite", multisite, "Comma-separated site ids for energy score and MST ranks");
    app->add_option("--multisite-count", multisite_count,
                    "Without --multisite, use the first N site ids (0 disables)")->capture_default_str();
    sem.add(app);
  }

  int run(std::ostream& log) {
    const auto dir = output_dir(out);
    const auto ds = load_dataset(data);
    VerifySettings s;
    s.window_days = window_days;
    s.n_members = members;
    s.sem = sem.config();
    s.seed = seed;
    if (!multisite.empty()) {
      for (const auto id : split(multisite, ',')) s.multisite_ids.emplace_back(trim(id));
    } else {
      for (const auto& site : ds.sites()) {
        if (static_cast<int>(s.multisite_ids.size()) >= multisite_count) break;
        s.multisite_ids.push_back(site.id);
      }
    }
    const auto dates = select_dates(ds, window_days, first_date, last_date);
    if (dates.empty()) fail(ErrorKind::NoTrainingData, "no valid dates with enough history");
    const auto report = run_verification(ds, dates, s, log);
    write_report(report, dir);
    log << "verify: " << dates.size() - report.skipped_dates.size() << " of " << dates.size()
        << " dates scored\n";
    if (report.skipped_dates.size() == dates.size()) {
      log << "verify: no date could be scored\n";
      return kDataOrFit;
    }
    return kSuccess;
  }
};

struct SweepCommand {
  std::uint64_t seed = 0;
  std::string out;
  std::string data;
  std::vector<int> windows{10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60};
  int members = kDefaultSiteMembers;
  std::string first_date;
  std::string last_date;
  SemOptions sem;

  void add(CLI::App* app) {
    app->add_option("--seed", seed, "Master seed")->required();
    app->add_option("--out", out, "Output directory (must exist)")->required();
    app->add_option("--data", data, "Dataset CSV")->required();
    app->add_option("--windows", windows, "Comma-separated window lengths M")
        ->delimiter(',')->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--members", members)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--first-date", first_date);
    app->add_option("--last-date", last_date);
    sem.add(app);
  }

  int run(std::ostream& log) {
    const auto dir = output_dir(out);
    const auto ds = load_dataset(data);
    const int max_m = *std::max_element(windows.begin(), windows.end());
    std::vector<Date> dates;
    if (first_date.empty() && last_date.empty()) {
      dates = dates_with_history(ds, max_m);
      if (dates.empty()) {
        fail(ErrorKind::InsufficientData, "no date has " + std::to_string(max_m) + " days of history");
      }
    } else {
      dates = select_dates(ds, 0, first_date, last_date);
    }
    const auto rows = window_sweep(ds, dates, windows, sem.config(), members, seed);
    std::ofstream csv(dir + "/sweep.csv", std::ios::binary);
    if (!csv) fail(ErrorKind::NotFound, "cannot write " + dir + "/sweep.csv");
    csv << "window_days,mean_crps,se,n_cases,n_skipped\n";
    for (const auto& r : rows) {
      csv << r.window_days << ',' << (r.n_cases ? format_decimal(r.mean_crps) : "") << ','
          << (r.n_cases ? format_decimal(r.standard_error) : "") << ',' << r.n_cases << ','
          << r.n_skipped << '\n';
      log << "sweep: M=" << r.window_days << " mean CRPS " << r.mean_crps << " over " << r.n_cases
          << " cases\n";
    }
    return kSuccess;
  }
};

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Numerical:
    case ErrorKind::EmbeddingFailure:
      return kNumerical;
    case ErrorKind::Domain:
      return kUsage;
    default:
      return kDataOrFit;
  }
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& log) {
  CLI::App app{"Probabilistic quantitative precipitation forecasting from a single NWP run"};
  app.name(raw_args.empty() ? "pqpf" : raw_args.front());
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  SynthCommand synth;
  FitCommand fit;
  ForecastCommand forecast;
  VerifyCommand verify;
  SweepCommand sweep;
  std::string config;
  auto add = [&](const char* name, const char* help, auto& command) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "key = value file; command-line flags take precedence");
    command.add(sub);
    return sub;
  };
  auto* synth_app = add("synth", "Generate a synthetic forecast/observation dataset", synth);
  auto* fit_app = add("fit", "Fit the two-stage model on a training window", fit);
  auto* forecast_app = add("forecast", "Sample predictive ensembles from a fitted model", forecast);
  auto* verify_app = add("verify", "Score reference and model forecasts over a dataset", verify);
  auto* sweep_app = add("sweep", "Mean CRPS as a function of the training window length", sweep);
  // Repeated vector options keep only the last occurrence.
  sweep_app->get_option("--windows")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  try {
    auto args = expand_config(raw_args);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    log << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    app.exit(e, msg, msg);
    log << msg.str();
    return e.get_exit_code() == 0 ? kSuccess : kUsage;
  } catch (const UsageError& e) {
    log << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (synth_app->parsed()) return synth.run(log);
    if (fit_app->parsed()) return fit.run(log);
    if (forecast_app->parsed()) return forecast.run(log);
    if (verify_app->parsed()) return verify.run(log);
    if (sweep_app->parsed()) return sweep.run(log);
  } catch (const UsageError& e) {
    log << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FitError& e) {
    log << "error: fit failed at stage '" << e.stage() << "' (" << to_string(e.kind())
        << "): " << e.what() << "\n";
    return exit_code_for(e) == kNumerical ? kNumerical : kDataOrFit;
  } catch (const Error& e) {
    log << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    if (e.kind() == ErrorKind::EmbeddingFailure) {
      log << "hint: reduce the grid size, or forecast at sites with --mode site\n";
    }
    return exit_code_for(e);
  }
  return kUsage;
}

}  // namespace pqpf::cli
