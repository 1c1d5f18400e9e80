#include "pairlasso/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

namespace pairlasso {

namespace {

// Explicit transforms over the standardized mt19937_64 stream keep draws
// reproducible across standard library implementations.
double u01(std::mt19937_64& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
}

double normal(std::mt19937_64& rng) {
  const double u1 = u01(rng);
  const double u2 = u01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t below(std::mt19937_64& rng, std::uint64_t m) {
  const std::uint64_t lim = std::numeric_limits<std::uint64_t>::max() -
                            std::numeric_limits<std::uint64_t>::max() % m;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= lim);
  return r % m;
}

std::vector<int> sample_no_replace(std::mt19937_64& rng, int p, int k) {
  std::vector<int> idx(static_cast<std::size_t>(p));
  std::iota(idx.begin(), idx.end(), 0);
  for (int t = 0; t < k; ++t) {
    const int u = t + static_cast<int>(below(rng, static_cast<std::uint64_t>(p - t)));
    std::swap(idx[static_cast<std::size_t>(t)], idx[static_cast<std::size_t>(u)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::pair<int, int> ordered(int a, int b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); }

std::vector<std::pair<int, int>> distinct_pairs_from(std::mt19937_64& rng,
                                                     const std::vector<int>& pool_a,
                                                     const std::vector<int>& pool_b, int k) {
  std::set<std::pair<int, int>> seen;
  std::vector<std::pair<int, int>> out;
  while (static_cast<int>(out.size()) < k) {
    const int a = pool_a[below(rng, pool_a.size())];
    const int b = pool_b[below(rng, pool_b.size())];
    if (a == b) continue;
    const auto pr = ordered(a, b);
    if (seen.insert(pr).second) out.push_back(pr);
  }
  return out;
}

}  // namespace

const char* truth_kind_name(TruthKind t) {
  switch (t) {
    case TruthKind::strong: return "strong";
    case TruthKind::weak: return "weak";
    case TruthKind::anti: return "anti";
    case TruthKind::pure: return "pure";
  }
  return "?";
}

TruthKind truth_kind_from_name(const std::string& s) {
  if (s == "strong") return TruthKind::strong;
  if (s == "weak") return TruthKind::weak;
  if (s == "anti") return TruthKind::anti;
  if (s == "pure") return TruthKind::pure;
  throw ConfigError("unknown truth kind '" + s + "'");
}

void SimDesign::validate() const {
  if (n < 2) throw ConfigError("simulation needs n >= 2");
  if (p < 2) throw ConfigError("simulation needs p >= 2");
  if (var_kind == ColumnKind::categorical && levels < 2)
    throw ConfigError("categorical simulation needs levels >= 2");
  if (n_main < 0 || n_int < 0) throw ConfigError("negative effect counts");
  if (!(snr > 0)) throw ConfigError("snr must be positive");
  const int mains = truth == TruthKind::pure ? 0 : n_main;
  if (mains > p) throw ConfigError("n_main exceeds p");
  switch (truth) {
    case TruthKind::strong:
      if (n_int > 0 && (mains < 2 || static_cast<long>(mains) * (mains - 1) / 2 < n_int))
        throw ConfigError("strong truth infeasible: not enough main-effect pairs");
      break;
    case TruthKind::weak:
      if (n_int > 0 && (mains < 1 || p - mains < 1 ||
                        static_cast<long>(mains) * (p - mains) < n_int))
        throw ConfigError("weak truth infeasible: not enough mixed pairs");
      break;
    case TruthKind::anti:
      if (p - mains < 2 * n_int)
        throw ConfigError("anti truth infeasible: need 2*n_int variables outside the mains");
      break;
    case TruthKind::pure:
      if (static_cast<long>(p) * (p - 1) / 2 < n_int)
        throw ConfigError("pure truth infeasible: not enough pairs");
      break;
  }
}

std::pair<Dataset, SimTruth> simulate(const SimDesign& design) {
  design.validate();
  std::mt19937_64 rng(design.seed);
  const int n = design.n, p = design.p;

  Dataset ds;
  ds.family = Family::gaussian;
  ds.response_name = "y";
  ds.columns.resize(static_cast<std::size_t>(p));
  for (int v = 0; v < p; ++v) {
    Column& col = ds.columns[static_cast<std::size_t>(v)];
    col.name = "x" + std::to_string(v + 1);
    col.kind = design.var_kind;
    if (design.var_kind == ColumnKind::categorical) {
      col.levels = design.levels;
      col.cat_values.resize(static_cast<std::size_t>(n));
      for (int r = 0; r < n; ++r)
        col.cat_values[static_cast<std::size_t>(r)] =
            1 + static_cast<std::int32_t>(below(rng, static_cast<std::uint64_t>(design.levels)));
    } else {
      col.cont_values.resize(n);
      for (int r = 0; r < n; ++r) col.cont_values[r] = normal(rng);
    }
  }

  SimTruth truth;
  const int mains_count = design.truth == TruthKind::pure ? 0 : design.n_main;
  truth.mains = sample_no_replace(rng, p, mains_count);

  std::vector<int> all(static_cast<std::size_t>(p));
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> others;
  {
    std::set<int> m(truth.mains.begin(), truth.mains.end());
    for (int v = 0; v < p; ++v)
      if (!m.count(v)) others.push_back(v);
  }
  switch (design.truth) {
    case TruthKind::strong:
      if (design.n_int > 0)
        truth.pairs = distinct_pairs_from(rng, truth.mains, truth.mains, design.n_int);
      break;
    case TruthKind::weak:
      if (design.n_int > 0)
        truth.pairs = distinct_pairs_from(rng, truth.mains, others, design.n_int);
      break;
    case TruthKind::anti: {
      // disjoint pairs of never-main variables
      std::vector<int> pool = others;
      for (std::size_t t = 0; t + 1 < pool.size(); ++t) {
        const std::size_t u = t + below(rng, pool.size() - t);
        std::swap(pool[t], pool[u]);
      }
      for (int t = 0; t < design.n_int; ++t)
        truth.pairs.push_back(ordered(pool[static_cast<std::size_t>(2 * t)],
                                      pool[static_cast<std::size_t>(2 * t + 1)]));
      break;
    }
    case TruthKind::pure:
      if (design.n_int > 0) truth.pairs = distinct_pairs_from(rng, all, all, design.n_int);
      break;
  }
  std::sort(truth.pairs.begin(), truth.pairs.end());

  Eigen::VectorXd signal = Eigen::VectorXd::Zero(n);
  const int L = design.levels;
  for (int v : truth.mains) {
    const Column& col = ds.columns[static_cast<std::size_t>(v)];
    if (design.var_kind == ColumnKind::categorical) {
      Eigen::VectorXd eff(L);
      for (int l = 0; l < L; ++l) eff[l] = normal(rng);
      eff.array() -= eff.mean();
      for (int r = 0; r < n; ++r) signal[r] += eff[col.cat_values[static_cast<std::size_t>(r)] - 1];
    } else {
      const double c = normal(rng);
      signal += c * col.cont_values;
    }
  }
  for (auto [a, b] : truth.pairs) {
    const Column& ca = ds.columns[static_cast<std::size_t>(a)];
    const Column& cb = ds.columns[static_cast<std::size_t>(b)];
    if (design.var_kind == ColumnKind::categorical) {
      Eigen::MatrixXd eff(L, L);
      for (int la = 0; la < L; ++la)
        for (int lb = 0; lb < L; ++lb) eff(la, lb) = normal(rng);
      // doubly center: a pure interaction table
      const Eigen::VectorXd rm = eff.rowwise().mean();
      const Eigen::VectorXd cm = eff.colwise().mean();
      const double gm = eff.mean();
      for (int la = 0; la < L; ++la)
        for (int lb = 0; lb < L; ++lb) eff(la, lb) += gm - rm[la] - cm[lb];
      for (int r = 0; r < n; ++r)
        signal[r] += eff(ca.cat_values[static_cast<std::size_t>(r)] - 1,
                         cb.cat_values[static_cast<std::size_t>(r)] - 1);
    } else {
      const double c = normal(rng);
      signal += c * ca.cont_values.cwiseProduct(cb.cont_values);
    }
  }

  const double var_signal = (signal.array() - signal.mean()).square().sum() / n;
  truth.noise_sd = var_signal > 0 ? std::sqrt(var_signal / design.snr) : 1.0;
  ds.y.resize(n);
  for (int r = 0; r < n; ++r) ds.y[r] = signal[r] + truth.noise_sd * normal(rng);
  truth.signal = std::move(signal);
  ds.validate();
  return {std::move(ds), std::move(truth)};
}

FdrCurve fdr_curve(std::span<const DiscoveryRun> runs, int k_max) {
  if (runs.empty()) throw ConfigError("fdr_curve needs at least one run");
  if (k_max < 1) throw ConfigError("fdr_curve needs k_max >= 1");
  for (const auto& run : runs)
    if (static_cast<int>(run.found.size()) < k_max)
      throw ConfigError("a run discovered only " + std::to_string(run.found.size()) +
                        " interactions, fewer than k_max = " + std::to_string(k_max));
  FdrCurve curve;
  curve.k_max = k_max;
  curve.mean_fdr.resize(static_cast<std::size_t>(k_max));
  curve.se.resize(static_cast<std::size_t>(k_max));
  const double R = static_cast<double>(runs.size());
  std::vector<double> fdr(runs.size());
  for (int k = 1; k <= k_max; ++k) {
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const std::set<std::pair<int, int>> truth(runs[r].truth.begin(), runs[r].truth.end());
      int false_found = 0;
      for (int t = 0; t < k; ++t)
        if (!truth.count(runs[r].found[static_cast<std::size_t>(t)])) ++false_found;
      fdr[r] = static_cast<double>(false_found) / k;
    }
    const double mean = std::accumulate(fdr.begin(), fdr.end(), 0.0) / R;
    double ss = 0.0;
    for (double f : fdr) ss += (f - mean) * (f - mean);
    const double sd = runs.size() > 1 ? std::sqrt(ss / (R - 1.0)) : 0.0;
    curve.mean_fdr[static_cast<std::size_t>(k - 1)] = mean;
    curve.se[static_cast<std::size_t>(k - 1)] = sd / std::sqrt(R);
  }
  return curve;
}

ClassificationMetrics classification_metrics(const Eigen::VectorXd& y_true,
                                             const Eigen::VectorXd& p_hat) {
  const Eigen::Index n = y_true.size();
  if (p_hat.size() != n) throw ConfigError("classification_metrics: size mismatch");
  Eigen::Index n1 = 0;
  for (Eigen::Index r = 0; r < n; ++r) {
    if (y_true[r] != 0.0 && y_true[r] != 1.0)
      throw ConfigError("classification_metrics: labels must be 0/1");
    if (y_true[r] == 1.0) ++n1;
  }
  const Eigen::Index n0 = n - n1;
  if (n1 == 0 || n0 == 0)
    throw ConfigError("classification_metrics: AUC needs both classes present");

  ClassificationMetrics m;
  Eigen::Index miss = 0;
  double ce = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double cls = p_hat[r] >= 0.5 ? 1.0 : 0.0;
    if (cls != y_true[r]) ++miss;
    // clamp the probability of the observed class; computing 1 - p first
    // keeps full precision when p is near 1
    const double py = y_true[r] == 1.0 ? p_hat[r] : 1.0 - p_hat[r];
    ce -= std::log(std::max(py, 1e-12));
  }
  m.zero_one = static_cast<double>(miss) / static_cast<double>(n);
  m.cross_entropy = ce / static_cast<double>(n);

  // average ranks over ties, then the Mann-Whitney identity
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return p_hat[a] < p_hat[b]; });
  std::vector<double> rank(static_cast<std::size_t>(n));
  std::size_t t = 0;
  while (t < order.size()) {
    std::size_t u = t;
    while (u + 1 < order.size() && p_hat[order[u + 1]] == p_hat[order[t]]) ++u;
    const double avg = (static_cast<double>(t + 1) + static_cast<double>(u + 1)) / 2.0;
    for (std::size_t w = t; w <= u; ++w) rank[static_cast<std::size_t>(order[w])] = avg;
    t = u + 1;
  }
  double rank_sum = 0.0;
  for (Eigen::Index r = 0; r < n; ++r)
    if (y_true[r] == 1.0) rank_sum += rank[static_cast<std::size_t>(r)];
  m.auc = (rank_sum - static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0) /
          (static_cast<double>(n1) * static_cast<double>(n0));
  return m;
}

BenchResult run_fdr_bench(const BenchConfig& cfg) {
  if (cfg.replicates < 1) throw ConfigError("run_fdr_bench needs at least one replicate");
  BenchResult out;
  for (int r = 0; r < cfg.replicates; ++r) {
    SimDesign d = cfg.design;
    d.seed = cfg.design.seed + static_cast<std::uint64_t>(r);
    auto [raw, truth] = simulate(d);
    auto [std_ds, st] = standardize(raw);
    PathOptions opt = cfg.path;
    opt.max_interactions = cfg.k_max;
    const PathResult path = fit_path(std_ds, opt);
    DiscoveryRun run;
    run.found = path.discovered_pairs();
    run.truth = truth.pairs;
    if (static_cast<int>(run.found.size()) < cfg.k_max)
      throw ConfigError("replicate " + std::to_string(r) + " found only " +
                        std::to_string(run.found.size()) + " interactions; extend the grid "
                        "(more lambdas or a smaller lambda_min_ratio)");
    out.runs.push_back(std::move(run));
  }
  out.curve = fdr_curve(out.runs, cfg.k_max);
  return out;
}

FdrCurve random_pair_baseline(const BenchConfig& cfg) {
  std::vector<DiscoveryRun> runs;
  std::vector<int> all(static_cast<std::size_t>(cfg.design.p));
  std::iota(all.begin(), all.end(), 0);
  for (int r = 0; r < cfg.replicates; ++r) {
    SimDesign d = cfg.design;
    d.seed = cfg.design.seed + static_cast<std::uint64_t>(r);
    auto [raw, truth] = simulate(d);
    (void)raw;
    // independent stream for the baseline draw
    std::mt19937_64 rng((d.seed + 1) * 0x9e3779b97f4a7c15ull);
    DiscoveryRun run;
    run.found = distinct_pairs_from(rng, all, all, cfg.k_max);
    run.truth = truth.pairs;
    runs.push_back(std::move(run));
  }
  return fdr_curve(runs, cfg.k_max);
}

}  // namespace pairlasso
