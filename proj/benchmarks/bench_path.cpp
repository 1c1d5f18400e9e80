// Whole-path timings: screened vs unscreened, and the score sweep used by
// the screening postcheck on a wide candidate universe.

#include <benchmark/benchmark.h>

#include <pairlasso/dataset.hpp>
#include <pairlasso/groups.hpp>
#include <pairlasso/path.hpp>
#include <pairlasso/simulation.hpp>

using namespace pairlasso;

namespace {

Dataset bench_dataset(int n, int p) {
  SimDesign design;
  design.n = n;
  design.p = p;
  design.var_kind = ColumnKind::continuous;
  design.truth = TruthKind::strong;
  design.n_main = 5;
  design.n_int = 5;
  design.snr = 2.0;
  design.seed = 11;
  Dataset ds = simulate(design).first;
  ds = standardize(ds).first;
  return ds;
}

void bm_path(benchmark::State& state, ScreenConfig::Mode mode) {
  auto ds = bench_dataset(400, static_cast<int>(state.range(0)));
  PathOptions opts;
  opts.solver.lambda_count = 20;
  opts.solver.lambda_min_ratio = 0.05;
  opts.screen.mode = mode;
  opts.screen.top_k = 20;
  for (auto _ : state) {
    auto result = fit_path(ds, opts);
    benchmark::DoNotOptimize(result.fits.size());
  }
}

void bm_path_none(benchmark::State& state) { bm_path(state, ScreenConfig::Mode::none); }
void bm_path_strong(benchmark::State& state) { bm_path(state, ScreenConfig::Mode::strong_rules); }
void bm_path_adaptive(benchmark::State& state) { bm_path(state, ScreenConfig::Mode::adaptive); }

void bm_null_scores(benchmark::State& state) {
  auto ds = bench_dataset(400, static_cast<int>(state.range(0)));
  GroupIndex index(ds);
  Eigen::VectorXd v = ds.y / static_cast<double>(ds.n());
  Eigen::VectorXd scratch;
  for (auto _ : state) {
    double best = 0.0;
    for (GroupId id = 0; id < index.total(); ++id) {
      auto g = index.make(ds, id);
      best = std::max(best, group_score(g, ds, v, scratch) / g.gamma);
    }
    benchmark::DoNotOptimize(best);
  }
  state.SetItemsProcessed(state.iterations() * index.total());
}

BENCHMARK(bm_path_none)->Arg(30)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_path_strong)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_path_adaptive)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_null_scores)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

}  // namespace
