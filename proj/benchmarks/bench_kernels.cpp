// Throughput of the implicit-design kernels: these dominate solver time,
// so regressions here translate directly into slower paths.

#include <benchmark/benchmark.h>

#include <pairlasso/dataset.hpp>
#include <pairlasso/groups.hpp>

#include <cstdint>
#include <random>

using namespace pairlasso;

namespace {

Dataset make_data(int n, int n_cat, int n_cont, int levels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto u01 = [&] { return ((rng() >> 11) + 1) * 0x1p-53; };
  Dataset ds;
  ds.family = Family::gaussian;
  ds.response_name = "y";
  ds.y = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) ds.y[i] = u01() - 0.5;
  for (int c = 0; c < n_cat; ++c) {
    Column col;
    col.name = "c" + std::to_string(c);
    col.kind = ColumnKind::categorical;
    col.levels = levels;
    col.cat_values.resize(n);
    for (int i = 0; i < n; ++i)
      col.cat_values[i] = 1 + static_cast<int>(u01() * levels);
    ds.columns.push_back(std::move(col));
  }
  for (int c = 0; c < n_cont; ++c) {
    Column col;
    col.name = "x" + std::to_string(c);
    col.kind = ColumnKind::continuous;
    col.cont_values = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) col.cont_values[i] = u01() * 2.0 - 1.0;
    ds.columns.push_back(std::move(col));
  }
  ds = standardize(ds).first;
  return ds;
}

FeatureGroup pair_group(const Dataset& ds, int i, int j) {
  GroupIndex index(ds);
  return index.make(ds, index.pair_id(i, j));
}

void run_score(benchmark::State& state, const Dataset& ds, const FeatureGroup& g) {
  Eigen::VectorXd v = ds.y / static_cast<double>(ds.n());
  Eigen::VectorXd scratch;
  for (auto _ : state) {
    double s = group_score(g, ds, v, scratch);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.n()));
}

void bm_score_cat_cat(benchmark::State& state) {
  auto ds = make_data(static_cast<int>(state.range(0)), 8, 0, 4, 7);
  run_score(state, ds, pair_group(ds, 0, 1));
}

void bm_score_cat_cont(benchmark::State& state) {
  auto ds = make_data(static_cast<int>(state.range(0)), 4, 4, 4, 7);
  run_score(state, ds, pair_group(ds, 0, 4));
}

void bm_score_cont_cont(benchmark::State& state) {
  auto ds = make_data(static_cast<int>(state.range(0)), 0, 8, 0, 7);
  run_score(state, ds, pair_group(ds, 0, 1));
}

void bm_eta_cat_cat(benchmark::State& state) {
  auto ds = make_data(static_cast<int>(state.range(0)), 8, 0, 4, 7);
  auto g = pair_group(ds, 0, 1);
  Eigen::VectorXd beta = Eigen::VectorXd::Constant(g.width, 0.25);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(ds.n());
  for (auto _ : state) {
    eta.setZero();
    add_group_times(g, ds, beta, eta);
    benchmark::DoNotOptimize(eta.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.n()));
}

BENCHMARK(bm_score_cat_cat)->Arg(1000)->Arg(10000);
BENCHMARK(bm_score_cat_cont)->Arg(1000)->Arg(10000);
BENCHMARK(bm_score_cont_cont)->Arg(1000)->Arg(10000);
BENCHMARK(bm_eta_cat_cat)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
