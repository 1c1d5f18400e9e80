#include <doctest.h>

#include <pairlasso/simulation.hpp>

#include <algorithm>
#include <cmath>
#include <set>

using namespace pairlasso;

namespace {

SimDesign base_design() {
  SimDesign d;
  d.n = 80;
  d.p = 12;
  d.var_kind = ColumnKind::continuous;
  d.truth = TruthKind::strong;
  d.n_main = 4;
  d.n_int = 3;
  d.snr = 2.0;
  d.seed = 42;
  return d;
}

bool contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

TEST_CASE("truth kind names round trip") {
  for (auto t : {TruthKind::strong, TruthKind::weak, TruthKind::anti, TruthKind::pure})
    CHECK(truth_kind_from_name(truth_kind_name(t)) == t);
  CHECK_THROWS_AS(truth_kind_from_name("nope"), ConfigError);
}

TEST_CASE("simulate is deterministic in the seed") {
  SimDesign d = base_design();
  auto [ds1, t1] = simulate(d);
  auto [ds2, t2] = simulate(d);
  CHECK((ds1.y.array() == ds2.y.array()).all());
  for (int v = 0; v < d.p; ++v)
    CHECK((ds1.columns[static_cast<std::size_t>(v)].cont_values.array() ==
           ds2.columns[static_cast<std::size_t>(v)].cont_values.array())
              .all());
  CHECK(t1.mains == t2.mains);
  CHECK(t1.pairs == t2.pairs);
  CHECK(t1.noise_sd == t2.noise_sd);

  d.seed = 43;
  auto [ds3, t3] = simulate(d);
  CHECK_FALSE((ds1.y.array() == ds3.y.array()).all());
}

TEST_CASE("truth regimes relate pairs to planted mains as advertised") {
  SUBCASE("strong: both endpoints planted") {
    SimDesign d = base_design();
    auto [ds, t] = simulate(d);
    CHECK(static_cast<int>(t.mains.size()) == d.n_main);
    CHECK(static_cast<int>(t.pairs.size()) == d.n_int);
    for (auto [a, b] : t.pairs) {
      CHECK(a < b);
      CHECK(contains(t.mains, a));
      CHECK(contains(t.mains, b));
    }
  }

  SUBCASE("weak: exactly one endpoint planted") {
    SimDesign d = base_design();
    d.truth = TruthKind::weak;
    auto [ds, t] = simulate(d);
    for (auto [a, b] : t.pairs)
      CHECK((contains(t.mains, a) ? 1 : 0) + (contains(t.mains, b) ? 1 : 0) == 1);
  }

  SUBCASE("anti: no endpoint planted, pairs disjoint") {
    SimDesign d = base_design();
    d.truth = TruthKind::anti;
    auto [ds, t] = simulate(d);
    std::set<int> used;
    for (auto [a, b] : t.pairs) {
      CHECK_FALSE(contains(t.mains, a));
      CHECK_FALSE(contains(t.mains, b));
      CHECK(used.insert(a).second);  // each variable in at most one pair
      CHECK(used.insert(b).second);
    }
  }

  SUBCASE("pure: no mains at all") {
    SimDesign d = base_design();
    d.truth = TruthKind::pure;
    auto [ds, t] = simulate(d);
    CHECK(t.mains.empty());
    CHECK(static_cast<int>(t.pairs.size()) == d.n_int);
  }

  SUBCASE("pairs are unique and in range") {
    for (auto kind : {TruthKind::strong, TruthKind::weak, TruthKind::anti, TruthKind::pure}) {
      SimDesign d = base_design();
      d.truth = kind;
      auto [ds, t] = simulate(d);
      std::set<std::pair<int, int>> uniq(t.pairs.begin(), t.pairs.end());
      CHECK(uniq.size() == t.pairs.size());
      for (auto [a, b] : t.pairs) {
        CHECK(a >= 0);
        CHECK(b < d.p);
      }
    }
  }
}

TEST_CASE("noise scales with the requested signal-to-noise ratio") {
  SimDesign d = base_design();
  auto [ds, t] = simulate(d);
  const double n = static_cast<double>(d.n);
  const double var_signal =
      (t.signal.array() - t.signal.mean()).square().sum() / n;
  CHECK(t.noise_sd == doctest::Approx(std::sqrt(var_signal / d.snr)).epsilon(1e-12));

  // quadrupling snr halves the noise scale on the same draws
  SimDesign d4 = d;
  d4.snr = 8.0;
  auto [ds4, t4] = simulate(d4);
  CHECK(t4.noise_sd == doctest::Approx(t.noise_sd / 2.0).epsilon(1e-12));
  CHECK((t4.signal.array() == t.signal.array()).all());  // feature and effect draws unchanged
}

TEST_CASE("categorical designs draw levels in range") {
  SimDesign d = base_design();
  d.var_kind = ColumnKind::categorical;
  d.levels = 4;
  auto [ds, t] = simulate(d);
  for (const auto& col : ds.columns) {
    CHECK(col.kind == ColumnKind::categorical);
    CHECK(col.levels == 4);
    std::set<std::int32_t> seen(col.cat_values.begin(), col.cat_values.end());
    for (auto v : seen) {
      CHECK(v >= 1);
      CHECK(v <= 4);
    }
  }
  ds.validate();
}

TEST_CASE("infeasible designs are rejected") {
  SimDesign d = base_design();
  d.n_main = 13;  // > p
  CHECK_THROWS_AS(d.validate(), ConfigError);

  d = base_design();
  d.truth = TruthKind::strong;
  d.n_main = 2;
  d.n_int = 2;  // only one pair available
  CHECK_THROWS_AS(d.validate(), ConfigError);

  d = base_design();
  d.truth = TruthKind::anti;
  d.n_main = 8;
  d.n_int = 3;  // needs 6 free variables, only 4 left
  CHECK_THROWS_AS(d.validate(), ConfigError);

  d = base_design();
  d.snr = 0.0;
  CHECK_THROWS_AS(d.validate(), ConfigError);

  d = base_design();
  d.var_kind = ColumnKind::categorical;
  d.levels = 1;
  CHECK_THROWS_AS(d.validate(), ConfigError);

  CHECK_NOTHROW(base_design().validate());
}

TEST_CASE("fdr_curve on a worked two-run example") {
  DiscoveryRun r1;
  r1.found = {{0, 1}, {0, 2}, {1, 2}};
  r1.truth = {{0, 1}, {1, 2}};
  DiscoveryRun r2;
  r2.found = {{0, 2}, {0, 1}, {3, 4}};
  r2.truth = {{0, 1}};
  std::vector<DiscoveryRun> runs{r1, r2};

  FdrCurve c = fdr_curve(runs, 3);
  REQUIRE(c.k_max == 3);
  // per-run FDRs: k=1 -> {0, 1}; k=2 -> {1/2, 1/2}; k=3 -> {1/3, 2/3}
  CHECK(c.mean_fdr[0] == doctest::Approx(0.5));
  CHECK(c.mean_fdr[1] == doctest::Approx(0.5));
  CHECK(c.mean_fdr[2] == doctest::Approx(0.5));
  CHECK(c.se[0] == doctest::Approx(0.5));
  CHECK(c.se[1] == doctest::Approx(0.0));
  CHECK(c.se[2] == doctest::Approx(1.0 / 6.0));

  SUBCASE("k_max beyond a run's discoveries is an error") {
    CHECK_THROWS_AS(fdr_curve(runs, 4), ConfigError);
  }
  SUBCASE("degenerate arguments") {
    CHECK_THROWS_AS(fdr_curve(std::vector<DiscoveryRun>{}, 1), ConfigError);
    CHECK_THROWS_AS(fdr_curve(runs, 0), ConfigError);
  }
}

TEST_CASE("classification metrics on worked examples") {
  SUBCASE("clean separation") {
    Eigen::VectorXd y(4), p(4);
    y << 0, 1, 1, 0;
    p << 0.1, 0.8, 0.6, 0.4;
    auto m = classification_metrics(y, p);
    CHECK(m.zero_one == 0.0);
    CHECK(m.auc == 1.0);
    const double ce =
        -(std::log(0.9) + std::log(0.8) + std::log(0.6) + std::log(0.6)) / 4.0;
    CHECK(m.cross_entropy == doctest::Approx(ce).epsilon(1e-14));
  }

  SUBCASE("all-tied probabilities give AUC one half") {
    Eigen::VectorXd y(2), p(2);
    y << 0, 1;
    p << 0.5, 0.5;
    auto m = classification_metrics(y, p);
    CHECK(m.auc == doctest::Approx(0.5));
    CHECK(m.zero_one == doctest::Approx(0.5));  // both predicted 1 at the threshold
  }

  SUBCASE("mixed ranks") {
    // pos probs {0.7, 0.3}, neg probs {0.5, 0.1}: 3 of 4 pairs ordered right
    Eigen::VectorXd y(4), p(4);
    y << 1, 0, 1, 0;
    p << 0.7, 0.5, 0.3, 0.1;
    auto m = classification_metrics(y, p);
    CHECK(m.auc == doctest::Approx(0.75));
  }

  SUBCASE("probabilities are clamped before the log") {
    Eigen::VectorXd y(2), p(2);
    y << 0, 1;
    p << 1.0, 0.0;  // as wrong as possible
    auto m = classification_metrics(y, p);
    CHECK(m.cross_entropy == doctest::Approx(-std::log(1e-12)).epsilon(1e-9));
    p << 0.0, 1.0;  // as right as possible
    m = classification_metrics(y, p);
    CHECK(m.cross_entropy >= 0.0);
    CHECK(m.cross_entropy < 1e-9);
  }

  SUBCASE("degenerate labels are rejected") {
    Eigen::VectorXd y(2), p(2);
    y << 1, 1;
    p << 0.5, 0.5;
    CHECK_THROWS_AS(classification_metrics(y, p), ConfigError);
    y << 0, 0.5;
    CHECK_THROWS_AS(classification_metrics(y, p), ConfigError);
    Eigen::VectorXd short_p(1);
    y << 0, 1;
    CHECK_THROWS_AS(classification_metrics(y, short_p), ConfigError);
  }
}

TEST_CASE("fdr bench runs replicates and records discovery order") {
  BenchConfig cfg;
  cfg.design.n = 100;
  cfg.design.p = 8;
  cfg.design.var_kind = ColumnKind::continuous;
  cfg.design.truth = TruthKind::strong;
  cfg.design.n_main = 3;
  cfg.design.n_int = 2;
  cfg.design.snr = 3.0;
  cfg.design.seed = 5;
  cfg.replicates = 3;
  cfg.k_max = 2;
  cfg.path.solver.lambda_count = 40;
  cfg.path.solver.lambda_min_ratio = 0.01;

  BenchResult res = run_fdr_bench(cfg);
  REQUIRE(static_cast<int>(res.runs.size()) == cfg.replicates);
  for (const auto& run : res.runs) {
    CHECK(static_cast<int>(run.found.size()) >= cfg.k_max);
    CHECK(run.truth.size() == 2);
  }
  REQUIRE(res.curve.mean_fdr.size() == 2);
  for (double f : res.curve.mean_fdr) {
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }

  // identical configuration, identical result: the bench is deterministic
  BenchResult again = run_fdr_bench(cfg);
  CHECK(again.curve.mean_fdr == res.curve.mean_fdr);
  for (std::size_t r = 0; r < res.runs.size(); ++r)
    CHECK(again.runs[r].found == res.runs[r].found);

  FdrCurve base = random_pair_baseline(cfg);
  REQUIRE(base.mean_fdr.size() == 2);
  for (double f : base.mean_fdr) {
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }
}
