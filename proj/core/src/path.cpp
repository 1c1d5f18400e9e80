#include "pairlasso/path.hpp"

#include <algorithm>
#include <cmath>

#include "pairlasso/parallel.hpp"

namespace pairlasso {

namespace {

void dloss_vector(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& eta,
                  Eigen::VectorXd& v) {
  const double n = static_cast<double>(y.size());
  if (family == Family::gaussian) {
    v = (eta - y) / n;
    return;
  }
  v.resize(y.size());
  for (Eigen::Index r = 0; r < y.size(); ++r) {
    const double e = y[r];
    const double x = eta[r];
    const double p = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    v[r] = (p - e) / n;
  }
}

}  // namespace

std::vector<std::pair<int, int>> PathResult::discovered_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& d : discoveries)
    if (d.is_pair) out.emplace_back(d.i, d.j);
  return out;
}

PathResult fit_path(const Dataset& ds, const PathOptions& opt) {
  opt.solver.validate();
  opt.screen.validate(ds.p());
  const Family family = ds.family;
  const GroupIndex index(ds);
  const int p = index.p();
  const int threads = thread_budget(opt.solver.threads);

  // universe: all mains, then the pair candidates in id order
  std::vector<GroupId> universe;
  if (opt.candidate_pairs) {
    universe.reserve(static_cast<std::size_t>(p) + opt.candidate_pairs->size());
    for (int i = 0; i < p; ++i) universe.push_back(index.main_id(i));
    std::vector<GroupId> ids;
    ids.reserve(opt.candidate_pairs->size());
    for (auto [i, j] : *opt.candidate_pairs) ids.push_back(index.pair_id(i, j));
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
      throw ConfigError("duplicate candidate pair");
    universe.insert(universe.end(), ids.begin(), ids.end());
  } else {
    universe.resize(static_cast<std::size_t>(index.total()));
    for (std::int64_t t = 0; t < index.total(); ++t)
      universe[static_cast<std::size_t>(t)] = t;
  }
  const std::size_t U = universe.size();

  PathResult result;
  result.p = p;
  result.universe_size = static_cast<std::int64_t>(U);
  result.null_intercept = null_intercept(family, ds.y);

  // score every group against the empty model; this is the lambda_max pass
  std::vector<double> scores(U, 0.0);
  {
    const Eigen::VectorXd v0 = null_loss_gradient_vector(family, ds.y);
    parallel_for(static_cast<std::int64_t>(U), threads, [&](std::int64_t lo, std::int64_t hi) {
      Eigen::VectorXd scratch;
      for (std::int64_t pos = lo; pos < hi; ++pos) {
        const FeatureGroup g = index.make(ds, universe[static_cast<std::size_t>(pos)]);
        scores[static_cast<std::size_t>(pos)] = group_score(g, ds, v0, scratch);
      }
    });
  }
  result.lambda_max = *std::max_element(scores.begin(), scores.end());
  if (!(result.lambda_max > 0))
    throw ConfigError("lambda_max is 0 (response carries no signal); nothing to fit");

  const std::vector<double> grid =
      lambda_grid(result.lambda_max, opt.solver.lambda_count, opt.solver.lambda_min_ratio);

  std::vector<char> active(U, 0), discovered(U, 0), in_working(U, 0);
  std::vector<double> entry_score(U, 0.0);
  const std::vector<double> gammas(U, 1.0);
  std::map<GroupId, Eigen::VectorXd> warm_coef;
  double warm_mu = result.null_intercept;
  bool have_warm = true;
  int pairs_found = 0;

  for (int k = 0; k < static_cast<int>(grid.size()); ++k) {
    const double lambda = grid[static_cast<std::size_t>(k)];
    const double lambda_prev = k == 0 ? grid[0] : grid[static_cast<std::size_t>(k - 1)];

    ScreenAudit audit;
    audit.lambda_index = k;
    audit.lambda = lambda;
    audit.universe = static_cast<std::int64_t>(U);

    std::fill(in_working.begin(), in_working.end(), 0);
    std::vector<std::size_t> working;
    if (opt.screen.mode == ScreenConfig::Mode::none) {
      working.resize(U);
      for (std::size_t pos = 0; pos < U; ++pos) working[pos] = pos;
      std::fill(in_working.begin(), in_working.end(), 1);
      audit.candidates = static_cast<std::int64_t>(U);
    } else {
      std::vector<char> gate;  // adaptive eligibility per position
      if (opt.screen.mode == ScreenConfig::Mode::adaptive) {
        std::vector<char> anchor(static_cast<std::size_t>(p), 0);
        for (int v :
             top_main_variables(std::span<const double>(scores.data(), static_cast<std::size_t>(p)),
                                opt.screen.top_k))
          anchor[static_cast<std::size_t>(v)] = 1;
        gate.assign(U, 0);
        for (std::size_t pos = 0; pos < U; ++pos) {
          const GroupId id = universe[pos];
          if (index.is_main(id)) {
            gate[pos] = 1;  // mains always stay candidates
          } else {
            auto [i, j] = index.pair_vars(id);
            gate[pos] = anchor[static_cast<std::size_t>(i)] || anchor[static_cast<std::size_t>(j)];
          }
        }
      }
      const std::vector<char> keep = strong_keep(scores, gammas, active, lambda, lambda_prev);
      for (std::size_t pos = 0; pos < U; ++pos) {
        const bool candidate = gate.empty() || gate[pos];
        if (candidate) ++audit.candidates;
        if (active[pos] || (candidate && keep[pos])) {
          in_working[pos] = 1;
          working.push_back(pos);
        }
      }
    }
    // scores[] still holds the previous lambda's values here; remember them as
    // the entry scores that admitted each working group
    for (std::size_t pos : working) entry_score[pos] = scores[pos];

    ModelFit fit;
    Eigen::VectorXd v;
    while (true) {
      if (static_cast<std::int64_t>(working.size()) > opt.screen.max_candidate_groups)
        throw ConfigError("working set exceeds max_candidate_groups; raise the budget or "
                          "lower top_k");
      std::vector<FeatureGroup> groups;
      groups.reserve(working.size());
      for (std::size_t pos : working) groups.push_back(index.make(ds, universe[pos]));

      WarmStart warm;
      warm.has_intercept = have_warm;
      warm.intercept = warm_mu;
      warm.coefficients = &warm_coef;
      std::vector<double> wscores;
      try {
        fit = fit_single(ds, groups, lambda, opt.solver, family, warm, &wscores);
      } catch (ConvergenceError& e) {
        throw ConvergenceError(std::string(e.what()) + " at lambda index " + std::to_string(k),
                               std::move(e.partial));
      }
      for (std::size_t t = 0; t < working.size(); ++t) scores[working[t]] = wscores[t];

      dloss_vector(family, ds.y, fit.fitted_linear, v);
      std::int64_t evals = 0;
      const std::vector<std::size_t> violators =
          kkt_postcheck(ds, index, universe, in_working, v, lambda, opt.solver.tol_kkt, scores,
                        threads, &evals);
      audit.score_evals += evals;
      audit.kkt_failures += static_cast<std::int64_t>(violators.size());
      if (violators.empty()) break;
      if (++audit.refit_rounds > 5)
        throw ConvergenceError("screening repair still finds KKT violations after 5 refit "
                               "rounds at lambda index " + std::to_string(k),
                               std::move(fit));
      for (std::size_t pos : violators) {
        in_working[pos] = 1;
        entry_score[pos] = scores[pos];
        working.push_back(pos);
      }
      std::sort(working.begin(), working.end());
      warm_coef = fit.coefficients;
      warm_mu = fit.intercept;
    }

    // fold screened-out groups into the reported residual
    double outside = 0.0;
    for (std::size_t pos = 0; pos < U; ++pos)
      if (!in_working[pos]) outside = std::max(outside, scores[pos] / lambda - 1.0);
    fit.kkt_max_violation = std::max(fit.kkt_max_violation, outside);

    // bookkeeping: activity, discoveries in entry-score order
    std::vector<Discovery> fresh;
    for (std::size_t pos = 0; pos < U; ++pos) active[pos] = 0;
    for (std::size_t t = 0; t < working.size(); ++t) {
      const std::size_t pos = working[t];
      const GroupId id = universe[pos];
      if (!fit.active(id)) continue;
      active[pos] = 1;
      if (discovered[pos]) continue;
      discovered[pos] = 1;
      Discovery d;
      d.id = id;
      d.lambda_index = k;
      d.entry_score = entry_score[pos];
      if (index.is_main(id)) {
        d.i = static_cast<int>(id);
      } else {
        auto [i, j] = index.pair_vars(id);
        d.i = i;
        d.j = j;
        d.is_pair = true;
        ++pairs_found;
      }
      fresh.push_back(d);
    }
    std::sort(fresh.begin(), fresh.end(), [](const Discovery& a, const Discovery& b) {
      if (a.entry_score != b.entry_score) return a.entry_score > b.entry_score;
      return a.id < b.id;
    });
    result.discoveries.insert(result.discoveries.end(), fresh.begin(), fresh.end());

    audit.working = static_cast<std::int64_t>(working.size());
    warm_coef = fit.coefficients;
    warm_mu = fit.intercept;
    have_warm = true;
    result.lambdas.push_back(lambda);
    result.fits.push_back(std::move(fit));
    result.audits.push_back(audit);

    if (opt.max_interactions > 0 && pairs_found >= opt.max_interactions) break;
  }
  return result;
}

}  // namespace pairlasso
