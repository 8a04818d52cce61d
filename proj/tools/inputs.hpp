#pragma once

// Small CSV inputs of the forecast command.

#include <string>
#include <vector>

#include "pqpf/forecasting.hpp"

namespace pqpf::cli {

// site_id,x_km,y_km,fcst_hundredths
std::vector<SiteForecast> read_site_forecasts(const std::string& path);
// site_id,x_km,y_km
std::vector<Site> read_sites(const std::string& path);
// row,col,fcst_hundredths; every cell of `grid` exactly once.
GriddedForecast read_grid_forecast(const std::string& path, const GridSpec& grid);

}  // namespace pqpf::cli
