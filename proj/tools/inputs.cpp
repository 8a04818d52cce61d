#include "inputs.hpp"

#include <fstream>
#include <set>

#include "pqpf/error.hpp"
#include "pqpf/text_io.hpp"

namespace pqpf::cli {
namespace {

// Rows of a CSV with a fixed header, split into fields.
template <typename Row>
void for_each_row(const std::string& path, std::string_view header, std::size_t n_fields, Row&& row) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::NotFound, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != header) {
    fail(ErrorKind::Parse, path + ":1: expected header '" + std::string(header) + "'");
  }
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto fields = split(t, ',');
    const auto where = path + ":" + std::to_string(number) + ": ";
    if (fields.size() != n_fields) {
      fail(ErrorKind::Parse, where + "expected " + std::to_string(n_fields) + " fields");
    }
    row(fields, where);
  }
}

double number_field(std::string_view text, const std::string& where) {
  double v = 0.0;
  if (!parse_double(text, v)) fail(ErrorKind::Parse, where + "malformed number '" + std::string(text) + "'");
  return v;
}

void check_unique(std::set<std::string>& seen, const std::string& id, const std::string& where) {
  if (id.empty()) fail(ErrorKind::Parse, where + "empty site_id");
  if (!seen.insert(id).second) fail(ErrorKind::Validation, where + "duplicate site " + id);
}

}  // namespace

std::vector<SiteForecast> read_site_forecasts(const std::string& path) {
  std::vector<SiteForecast> out;
  std::set<std::string> seen;
  for_each_row(path, "site_id,x_km,y_km,fcst_hundredths", 4, [&](const auto& f, const std::string& where) {
    SiteForecast s;
    s.site = Site{std::string(f[0]), number_field(f[1], where), number_field(f[2], where)};
    s.fcst = number_field(f[3], where);
    check_unique(seen, s.site.id, where);
    if (!(s.fcst >= 0.0)) fail(ErrorKind::Validation, where + "negative forecast");
    out.push_back(std::move(s));
  });
  if (out.empty()) fail(ErrorKind::NoData, path + ": no sites");
  return out;
}

std::vector<Site> read_sites(const std::string& path) {
  std::vector<Site> out;
  std::set<std::string> seen;
  for_each_row(path, "site_id,x_km,y_km", 3, [&](const auto& f, const std::string& where) {
    Site s{std::string(f[0]), number_field(f[1], where), number_field(f[2], where)};
    check_unique(seen, s.id, where);
    out.push_back(std::move(s));
  });
  if (out.empty()) fail(ErrorKind::NoData, path + ": no sites");
  return out;
}

GriddedForecast read_grid_forecast(const std::string& path, const GridSpec& grid) {
  grid.validate();
  GriddedForecast g;
  g.grid = grid;
  g.fcst.assign(grid.size(), 0.0);
  std::vector<char> filled(grid.size(), 0);
  for_each_row(path, "row,col,fcst_hundredths", 3, [&](const auto& f, const std::string& where) {
    long long row = 0, col = 0;
    if (!parse_int(f[0], row) || !parse_int(f[1], col)) fail(ErrorKind::Parse, where + "malformed cell index");
    if (row < 0 || row >= grid.ny || col < 0 || col >= grid.nx) {
      fail(ErrorKind::Validation, where + "cell outside the grid");
    }
    const auto k = static_cast<std::size_t>(row * grid.nx + col);
    if (filled[k]) fail(ErrorKind::Validation, where + "duplicate cell");
    filled[k] = 1;
    g.fcst[k] = number_field(f[2], where);
    if (!(g.fcst[k] >= 0.0)) fail(ErrorKind::Validation, where + "negative forecast");
  });
  for (std::size_t k = 0; k < filled.size(); ++k) {
    if (!filled[k]) {
      fail(ErrorKind::Validation, path + ": missing cell row " + std::to_string(k / grid.nx) +
                                      " col " + std::to_string(k % grid.nx));
    }
  }
  return g;
}

}  // namespace pqpf::cli
