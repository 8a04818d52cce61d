#include <benchmark/benchmark.h>

#include "pqpf/estimation.hpp"
#include "pqpf/forecasting.hpp"
#include "pqpf/random_fields.hpp"
#include "pqpf/synth.hpp"
#include "pqpf/verification.hpp"

using namespace pqpf;

static void BM_CirculantSample(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const CirculantEmbedding ce(GridSpec{0.0, 0.0, 1.0, n, n}, ExpCorrelation(8.0));
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(ce.sample(rng));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_CirculantSample)->Arg(32)->Arg(64)->Arg(128);

static void BM_CirculantSetup(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    CirculantEmbedding ce(GridSpec{0.0, 0.0, 1.0, n, n}, ExpCorrelation(8.0));
    benchmark::DoNotOptimize(ce.embedding_nx());
  }
}
BENCHMARK(BM_CirculantSetup)->Arg(64)->Arg(128);

static void BM_DenseSample(benchmark::State& state) {
  SynthSpec spec;
  spec.n_sites = static_cast<int>(state.range(0));
  const auto sites = synth_sites(spec);
  const MvnSampler s(Eigen::VectorXd::Zero(spec.n_sites), correlation_matrix(sites, ExpCorrelation(25.0)));
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(s.sample(rng));
}
BENCHMARK(BM_DenseSample)->Arg(50)->Arg(200);

static void BM_GibbsSweep(benchmark::State& state) {
  SynthSpec spec;
  spec.n_sites = static_cast<int>(state.range(0));
  const auto sites = synth_sites(spec);
  OrthantConstraint c;
  for (int i = 0; i < spec.n_sites; ++i) c.push_back(i % 3 ? Orthant::Positive : Orthant::Nonpositive);
  TruncatedMvnGibbs g(Eigen::VectorXd::Zero(spec.n_sites), correlation_matrix(sites, ExpCorrelation(25.0)), c);
  Rng rng(3);
  for (auto _ : state) {
    g.sweep(rng);
    benchmark::DoNotOptimize(g.state().data());
  }
}
BENCHMARK(BM_GibbsSweep)->Arg(50)->Arg(200);

static void BM_CrpsEnsemble(benchmark::State& state) {
  Rng rng(4);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = rng.uniform() < 0.4 ? 0.0 : 50.0 * rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(crps_ensemble(x, 12.0));
}
BENCHMARK(BM_CrpsEnsemble)->Arg(19)->Arg(1000)->Arg(10000);

static void BM_CrpsNumericMixed(benchmark::State& state) {
  const auto f = PredictiveCdf::mixed(0.4, {3.0, 0.6});
  for (auto _ : state) benchmark::DoNotOptimize(crps_numeric(f, 12.0));
}
BENCHMARK(BM_CrpsNumericMixed);

static void BM_MstRank(benchmark::State& state) {
  Rng rng(5);
  Eigen::MatrixXd m(19, 4);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 20.0 * rng.uniform();
  const Eigen::VectorXd obs = Eigen::VectorXd::Constant(4, 7.0);
  for (auto _ : state) benchmark::DoNotOptimize(mst_rank(m, obs, rng));
}
BENCHMARK(BM_MstRank);

static void BM_FitModel(benchmark::State& state) {
  SynthSpec spec;
  spec.n_days = 30;
  const auto ds = synth_generate(spec);
  const auto window = make_window(ds, ds.dates().back() + std::chrono::days{1}, 30);
  for (auto _ : state) benchmark::DoNotOptimize(fit_model(window, SemConfig{}));
}
BENCHMARK(BM_FitModel)->Unit(benchmark::kMillisecond);

static void BM_SiteEnsemble(benchmark::State& state) {
  FittedModel model;
  model.occurrence = {-0.3, 0.3, 0.1};
  model.rho_km = 25.0;
  model.amount = {2.0, 0.6, 0.5, 0.04, 0.004};
  model.r_km = 15.0;
  SynthSpec spec;
  std::vector<SiteForecast> in;
  for (const auto& s : synth_sites(spec)) in.push_back({s, 20.0});
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_site_ensemble(model, in, 19, ++seed));
}
BENCHMARK(BM_SiteEnsemble);
BENCHMARK_MAIN();
