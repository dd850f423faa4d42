#include <benchmark/benchmark.h>

#include "coxbo/acquisition.hpp"
#include "coxbo/bo.hpp"
#include "coxbo/inference.hpp"
#include "coxbo/pointprocess.hpp"

namespace {

using namespace coxbo;

Grid line_grid(benchmark::State& state) {
  return Grid({0.0}, {100.0}, {static_cast<std::size_t>(state.range(0))});
}

void BM_ModelConstruction(benchmark::State& state) {
  const Grid grid = line_grid(state);
  const KernelSpec k = KernelSpec::default_for(grid.lower(), grid.upper());
  for (auto _ : state) benchmark::DoNotOptimize(TransformedKernelModel(k, grid, 1.0));
}
BENCHMARK(BM_ModelConstruction)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_FitMap(benchmark::State& state) {
  const IntensityFunction f = synthetic_intensity_function(3);
  const EventSet events = thinning_sample(f, 1);
  const Grid grid = line_grid(state);
  const TransformedKernelModel model(KernelSpec::default_for(grid.lower(), grid.upper()), grid, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(fit_map(events, model, LinkFunction(LinkKind::kQuadratic), {}));
  state.counters["events"] = static_cast<double>(events.size());
}
BENCHMARK(BM_FitMap)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_PosteriorCovariance(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const Grid grid({0.0, 0.0}, {50.0, 50.0}, {side, side});
  const KernelSpec k = KernelSpec::default_for(grid.lower(), grid.upper());
  const PriorCovariance prior = prior_covariance(grid, k, 1e-8);
  const EventSet none(grid.lower(), grid.upper());
  const Eigen::VectorXd g = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.size()), 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(posterior_covariance(g, none, grid, LinkFunction(LinkKind::kQuadratic), prior));
  }
}
BENCHMARK(BM_PosteriorCovariance)->Arg(20)->Arg(35)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_AcquisitionSweep(benchmark::State& state) {
  const Grid grid({0.0}, {100.0}, {100});
  const KernelSpec k = KernelSpec::default_for(grid.lower(), grid.upper());
  const Posterior post = prior_posterior(grid, LinkFunction(LinkKind::kQuadratic), prior_covariance(grid, k, 1e-8));
  AcquisitionSpec spec;
  spec.kind = static_cast<AcquisitionKind>(state.range(0));
  const auto centers = candidate_grid(grid, 2.0);
  for (auto _ : state) {
    double best = 0.0;
    for (const auto& c : centers) best = std::max(best, acquisition_score(spec, post, Region{c, 2.0}));
    benchmark::DoNotOptimize(best);
  }
  state.SetLabel(std::string(AcquisitionSpec::kind_name(spec.kind)));
}
BENCHMARK(BM_AcquisitionSweep)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_BoStep(benchmark::State& state) {
  const IntensityFunction f = bump_intensity({{71.0}, 2.0, 10.0, 0.5}, {0.0}, {100.0});
  const EventSet data = thinning_sample(f, 0);
  BOConfig cfg;
  cfg.grid = Grid({0.0}, {100.0}, {100});
  cfg.kernel = KernelSpec::default_for(cfg.grid.lower(), cfg.grid.upper());
  cfg.initial_regions = {Region{{25.0}, 2.0}, Region{{60.0}, 2.0}};
  cfg.budget = 5;
  for (auto _ : state) benchmark::DoNotOptimize(run_bo(data, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.budget));
}
BENCHMARK(BM_BoStep)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
