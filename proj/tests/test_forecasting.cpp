#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pqpf/error.hpp"
#include "pqpf/forecasting.hpp"
#include "pqpf/special_functions.hpp"
#include "pqpf/verification.hpp"
#include "support.hpp"

using namespace pqpf;

namespace {

FittedModel make_model(OccurrenceTrendParams g, double rho, GammaCoeffs c, double r) {
  FittedModel m;
  m.occurrence = g;
  m.rho_km = rho;
  m.amount = c;
  m.r_km = r;
  m.min_valid_mean = 0.5;
  return m;
}

const GammaCoeffs kAmount{1.2, 0.6, 0.3, 0.1, 0.01};

FittedModel default_model(double rho = 20.0, double r = 15.0) {
  return make_model({-0.2, 0.4, -0.3}, rho, kAmount, r);
}

std::vector<SiteForecast> sites_at(const std::vector<std::pair<double, double>>& xy, double fcst) {
  std::vector<SiteForecast> out;
  for (std::size_t i = 0; i < xy.size(); ++i) {
    out.push_back({Site{"S" + std::to_string(i), xy[i].first, xy[i].second}, fcst});
  }
  return out;
}

double column_correlation(const Eigen::MatrixXd& m, Eigen::Index a, Eigen::Index b) {
  const Eigen::VectorXd x = m.col(a).array() - m.col(a).mean();
  const Eigen::VectorXd y = m.col(b).array() - m.col(b).mean();
  return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
}

double variance(std::span<const double> v) {
  double s = 0.0, ss = 0.0;
  for (const double x : v) s += x, ss += x * x;
  const double n = static_cast<double>(v.size());
  return (ss - s * s / n) / (n - 1.0);
}

}  // namespace

TEST(SiteEnsemble, Deterministic) {
  const auto in = sites_at({{0, 0}, {5, 3}, {20, 1}}, 12.0);
  const auto a = generate_site_ensemble(default_model(), in, 50, 9);
  const auto b = generate_site_ensemble(default_model(), in, 50, 9);
  EXPECT_EQ(a.members, b.members);
  EXPECT_NE(a.members, generate_site_ensemble(default_model(), in, 50, 10).members);
  EXPECT_EQ(a.seed, 9u);
}

TEST(SiteEnsemble, MembersIndependentOfEnsembleSize) {
  const auto in = sites_at({{0, 0}, {5, 3}}, 12.0);
  const auto small = generate_site_ensemble(default_model(), in, 5, 4);
  const auto big = generate_site_ensemble(default_model(), in, 40, 4);
  EXPECT_EQ(small.members, big.members.topRows(5));
}

TEST(SiteEnsemble, SingleSiteDryProbability) {
  const auto model = default_model();
  for (const double fcst : {0.0, 1.0, 27.0}) {
    const auto ens = generate_site_ensemble(model, sites_at({{0, 0}}, fcst), 10000, 21);
    const double dry = (ens.members.array() == 0.0).cast<double>().mean();
    const double mu = occurrence_trend(model.occurrence, cube_root(Accumulation(fcst)), fcst == 0.0);
    EXPECT_NEAR(dry, special::normal_cdf(-mu), 0.02) << fcst;
  }
}

TEST(SiteEnsemble, SingleSiteWetMeanMatchesGammaMean) {
  const auto model = default_model();
  const double fcst = 8.0;
  const auto ens = generate_site_ensemble(model, sites_at({{0, 0}}, fcst), 20000, 22);
  std::vector<double> wet;
  for (Eigen::Index i = 0; i < ens.n_members(); ++i) {
    if (ens.members(i, 0) > 0.0) wet.push_back(std::cbrt(ens.members(i, 0)));
  }
  const auto g = gamma_marginal(model.amount, CubeRootValue(2.0), false);
  // Brute-force reference: direct Gamma draws of the same size.
  std::mt19937_64 gen(5);
  std::gamma_distribution<double> dist(g.alpha, g.beta);
  double ref = 0.0;
  for (std::size_t i = 0; i < wet.size(); ++i) ref += dist(gen);
  ref /= static_cast<double>(wet.size());
  double mean = 0.0;
  for (const double y : wet) mean += y;
  mean /= static_cast<double>(wet.size());
  const double se = std::sqrt(2.0 * g.variance() / static_cast<double>(wet.size()));
  EXPECT_NEAR(mean, ref, 4.0 * se);
  EXPECT_NEAR(mean, g.mean(), 4.0 * se);
}

TEST(SiteEnsemble, NonnegativeAndFinite) {
  const auto in = sites_at({{0, 0}, {3, 3}, {6, 0}, {50, 50}}, 40.0);
  const auto ens = generate_site_ensemble(default_model(), in, 2000, 23);
  EXPECT_TRUE((ens.members.array() >= 0.0).all());
  EXPECT_TRUE(ens.members.allFinite());
}

TEST(SiteEnsemble, NearSitesMoreCorrelatedThanFar) {
  const auto in = sites_at({{0, 0}, {1, 0}, {500, 0}}, 27.0);
  const auto ens = generate_site_ensemble(default_model(20.0, 15.0), in, 10000, 24);
  EXPECT_GT(column_correlation(ens.members, 0, 1), column_correlation(ens.members, 0, 2) + 0.3);
}

TEST(SiteEnsemble, NonpositiveMeanFallsBack) {
  auto model = make_model({0.5, 0.0, 0.0}, 10.0, {-1.0, 1.0, 0.0, 0.2, 0.0}, 10.0);
  model.min_valid_mean = 0.7;
  // Cube-root forecast 0.5 gives mean -0.5; forecast 8 gives mean 1.
  std::vector<SiteForecast> in{{Site{"a", 0, 0}, 0.125}, {Site{"b", 5, 0}, 8.0}};
  const auto ens = generate_site_ensemble(model, in, 200, 25);
  ASSERT_EQ(ens.fallback_locations.size(), 1u);
  EXPECT_EQ(ens.fallback_locations[0], 0u);
  const auto m = site_marginal(model, 0.125);
  EXPECT_TRUE(m.mean_fallback);
  EXPECT_DOUBLE_EQ(m.gamma.mean(), 0.7);
}

TEST(SiteEnsemble, RejectsBadArguments) {
  EXPECT_THROW(generate_site_ensemble(default_model(), sites_at({{0, 0}}, 1.0), 0, 1), Error);
  EXPECT_THROW(generate_site_ensemble(default_model(), std::vector<SiteForecast>{}, 5, 1), Error);
}

TEST(GridEnsemble, AgreesWithSitePath) {
  const GridSpec grid{0.0, 0.0, 4.0, 10, 10};
  GriddedForecast in{grid, {}};
  Rng rng(3);
  for (std::size_t k = 0; k < grid.size(); ++k) in.fcst.push_back(rng.uniform() < 0.3 ? 0.0 : 30.0 * rng.uniform());
  std::vector<SiteForecast> sites;
  for (int r = 0; r < grid.ny; ++r) {
    for (int c = 0; c < grid.nx; ++c) {
      const auto p = grid.node(c, r);
      sites.push_back({Site{std::to_string(r * grid.nx + c), p.x, p.y}, in.fcst[static_cast<std::size_t>(r * grid.nx + c)]});
    }
  }
  const auto model = default_model(12.0, 8.0);
  const int n = 10000;
  const auto g = generate_grid_ensemble(model, in, n, 31);
  const auto s = generate_site_ensemble(model, sites, n, 32);
  ASSERT_EQ(g.n_locations(), s.n_locations());
  for (Eigen::Index c = 0; c < g.n_locations(); ++c) {
    const double wg = (g.members.col(c).array() > 0.0).cast<double>().mean();
    const double ws = (s.members.col(c).array() > 0.0).cast<double>().mean();
    EXPECT_NEAR(wg, ws, 0.03) << "cell " << c;
  }
}

TEST(GridEnsemble, DryTrendGivesLowWetFraction) {
  const GridSpec grid{0.0, 0.0, 5.0, 12, 9};
  GriddedForecast in{grid, std::vector<double>(grid.size(), 0.0)};
  const auto model = make_model({-0.5, 0.5, -2.0}, 20.0, kAmount, 15.0);
  const auto ens = generate_grid_ensemble(model, in, 2000, 33);
  for (Eigen::Index c = 0; c < ens.n_locations(); ++c) {
    EXPECT_LT((ens.members.col(c).array() > 0.0).cast<double>().mean(), 0.05);
  }
}

TEST(GridEnsemble, Deterministic) {
  const GridSpec grid{0.0, 0.0, 5.0, 6, 5};
  GriddedForecast in{grid, std::vector<double>(grid.size(), 10.0)};
  const auto a = generate_grid_ensemble(default_model(), in, 7, 34);
  EXPECT_EQ(a.members, generate_grid_ensemble(default_model(), in, 7, 34).members);
  ASSERT_TRUE(a.grid.has_value());
  EXPECT_EQ(a.n_locations(), 30);
}

TEST(GridEnsemble, EmbeddingFailureCarriesAdvice) {
  const GridSpec grid{0.0, 0.0, 1.0, 4, 4};
  GriddedForecast in{grid, std::vector<double>(grid.size(), 10.0)};
  try {
    generate_grid_ensemble(default_model(10.0, 10.0), in, 3, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmbeddingFailure);
    EXPECT_NE(std::string(e.what()).find("site path"), std::string::npos);
  }
}

TEST(Interpolation, BilinearToSites) {
  const GridSpec grid{0.0, 0.0, 10.0, 2, 2};
  GriddedForecast in{grid, {0.0, 10.0, 20.0, 30.0}};
  const std::vector<Site> sites{{"c", 5.0, 5.0}, {"n", 10.0, 0.0}};
  const auto out = interpolate_to_sites(in, sites);
  EXPECT_DOUBLE_EQ(out[0].fcst, 15.0);
  EXPECT_DOUBLE_EQ(out[1].fcst, 10.0);
  EXPECT_EQ(out[1].site.id, "n");
}

TEST(ArealAverage, Examples) {
  EXPECT_EQ(areal_average(std::vector<double>{0.0, 0.0, 0.0}), 0.0);
  EXPECT_EQ(areal_average(std::vector<double>{7.5}), 7.5);
  EXPECT_EQ(areal_average(std::vector<double>{8.0, 0.0}), 4.0);
  try {
    areal_average(std::vector<double>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
  }
}

TEST(ArealEnsemble, SingleSiteReducesToMarginal) {
  const auto in = sites_at({{3, 4}}, 15.0);
  const auto areal = areal_ensemble(default_model(), in, 500, 41);
  const auto site = generate_site_ensemble(default_model(), in, 500, 41);
  ASSERT_EQ(areal.size(), 500u);
  for (std::size_t i = 0; i < areal.size(); ++i) EXPECT_EQ(areal[i], site.members(static_cast<Eigen::Index>(i), 0));
}

TEST(ArealEnsemble, DefaultSize) { EXPECT_EQ(kDefaultArealMembers, 10000); }

TEST(ArealEnsemble, RangeLimits) {
  const auto in = sites_at({{0, 0}, {10, 0}, {0, 10}, {10, 10}}, 20.0);
  const int n = 10000;
  const auto indep_model = default_model(0.001, 0.001);
  const auto small = areal_ensemble(indep_model, in, n, 42);
  const auto large = areal_ensemble(default_model(1e6, 1e6), in, n, 42);

  const auto sites = generate_site_ensemble(indep_model, in, n, 43);
  double mean_site_var = 0.0;
  for (Eigen::Index j = 0; j < 4; ++j) {
    const Eigen::VectorXd col = sites.members.col(j);
    mean_site_var += variance({col.data(), static_cast<std::size_t>(col.size())}) / 4.0;
  }
  EXPECT_NEAR(variance(small), mean_site_var / 4.0, 0.1 * mean_site_var / 4.0);
  EXPECT_GT(variance(large), variance(small));
}

TEST(Climatology, Examples) {
  const auto clim = EmpiricalClimatology::pooled({0, 0, 10, 20});
  const auto members = climatology_forecast(clim);
  ASSERT_EQ(members.rows(), 4);
  double wet = 0.0;
  for (const double v : clim.values()) wet += v > 0.0;
  EXPECT_EQ(wet / 4.0, 0.5);
  EXPECT_DOUBLE_EQ(crps_ensemble(clim.values(), 0.0), 3.125);

  const auto single = EmpiricalClimatology::pooled({6.0});
  EXPECT_DOUBLE_EQ(crps_ensemble(single.values(), 2.5), 3.5);
}

TEST(Climatology, JointTuples) {
  Eigen::MatrixXd t(3, 2);
  t << 0, 1, 2, 3, 4, 5;
  const auto clim = EmpiricalClimatology::joint(t);
  EXPECT_TRUE(clim.is_joint());
  EXPECT_EQ(climatology_forecast(clim), t);
}

TEST(Climatology, EmptyHistory) {
  try {
    EmpiricalClimatology::pooled({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoTrainingData);
  }
  EXPECT_THROW(EmpiricalClimatology::joint(Eigen::MatrixXd(0, 3)), Error);
}

TEST(IndependenceBaseline, SingleSiteMatchesSpatial) {
  const auto in = sites_at({{0, 0}}, 9.0);
  EXPECT_EQ(independence_baseline_ensemble(default_model(), in, 300, 51).members,
            generate_site_ensemble(default_model(), in, 300, 51).members);
}

TEST(IndependenceBaseline, SameMarginalsNoCorrelation) {
  const auto in = sites_at({{0, 0}, {2, 0}}, 30.0);
  const auto ens = independence_baseline_ensemble(default_model(50.0, 50.0), in, 10000, 52);
  EXPECT_NEAR(column_correlation(ens.members, 0, 1), 0.0, 0.03);
  const auto far = sites_at({{0, 0}, {2000, 0}}, 30.0);
  const auto spatial = generate_site_ensemble(default_model(), far, 10000, 53);
  EXPECT_NEAR(column_correlation(spatial.members, 0, 1), 0.0, 0.03);
}

TEST(IndependenceBaseline, WorseEnergyScoreOnCorrelatedTruth) {
  // Truth drawn from the spatial model itself at four close sites.
  const auto model = default_model(40.0, 30.0);
  double es_spatial = 0.0, es_indep = 0.0;
  for (int d = 0; d < 100; ++d) {
    Rng rng(static_cast<std::uint64_t>(1000 + d));
    const double f = 40.0 * rng.uniform();
    const auto in = sites_at({{0, 0}, {6, 0}, {0, 6}, {6, 6}}, f);
    const auto truth = generate_site_ensemble(model, in, 1, 7000 + static_cast<std::uint64_t>(d));
    const Eigen::VectorXd obs = truth.members.row(0).transpose();
    es_spatial += energy_score(generate_site_ensemble(model, in, 19, static_cast<std::uint64_t>(d)).members, obs);
    es_indep += energy_score(independence_baseline_ensemble(model, in, 19, static_cast<std::uint64_t>(d)).members, obs);
  }
  EXPECT_LT(es_spatial, es_indep);
}

TEST(EnsembleCsv, SiteFormat) {
  pqpf::testing::TempDir dir("ens");
  const auto in = sites_at({{0, 0}, {1, 1}, {2, 2}}, 20.0);
  const auto ens = generate_site_ensemble(default_model(), in, 4, 61);
  write_site_ensemble_csv(ens, dir.file("e.csv"));
  const auto text = pqpf::testing::read_file(dir.file("e.csv"));
  EXPECT_EQ(text.rfind("member,site_id,value_hundredths_inch\n1,S0,", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 4 * 3);
}

TEST(EnsembleCsv, GridFormat) {
  pqpf::testing::TempDir dir("grid");
  const GridSpec grid{0.0, 0.0, 5.0, 3, 2};
  GriddedForecast in{grid, std::vector<double>(grid.size(), 5.0)};
  const auto ens = generate_grid_ensemble(default_model(2.0, 2.0), in, 2, 62);
  const auto paths = write_grid_ensemble_csv(ens, dir.file("m_"));
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(paths[0], dir.file("m_0001.csv"));
  const auto text = pqpf::testing::read_file(paths[1]);
  EXPECT_EQ(text.rfind("row,col,value_hundredths_inch\n0,0,", 0), 0u);
  EXPECT_NE(text.find("\n1,2,"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
}
