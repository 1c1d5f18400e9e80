#include "pairlasso/screening.hpp"

#include <algorithm>
#include <numeric>

#include "pairlasso/parallel.hpp"

namespace pairlasso {

void ScreenConfig::validate(int p) const {
  if (top_k < 1) throw ConfigError("top_k must be at least 1");
  if (max_candidate_groups < p)
    throw ConfigError("max_candidate_groups must be at least p (every main effect)");
}

const char* screen_mode_name(ScreenConfig::Mode m) {
  switch (m) {
    case ScreenConfig::Mode::none: return "none";
    case ScreenConfig::Mode::strong_rules: return "strong";
    case ScreenConfig::Mode::adaptive: return "adaptive";
  }
  return "?";
}

ScreenConfig::Mode screen_mode_from_name(const std::string& s) {
  if (s == "none") return ScreenConfig::Mode::none;
  if (s == "strong") return ScreenConfig::Mode::strong_rules;
  if (s == "adaptive") return ScreenConfig::Mode::adaptive;
  throw ConfigError("unknown screen mode '" + s + "' (expected none, strong or adaptive)");
}

std::vector<char> strong_keep(std::span<const double> scores, std::span<const double> gammas,
                              std::span<const char> active, double lambda, double lambda_prev) {
  if (scores.size() != gammas.size() || scores.size() != active.size())
    throw ConfigError("strong_keep: span sizes differ");
  const double bar = 2.0 * lambda - lambda_prev;
  std::vector<char> keep(scores.size(), 0);
  for (std::size_t k = 0; k < scores.size(); ++k)
    keep[k] = active[k] || scores[k] / gammas[k] >= bar;
  return keep;
}

std::vector<int> top_main_variables(std::span<const double> main_scores, int top_k) {
  if (top_k < 1) throw ConfigError("top_k must be at least 1");
  const int p = static_cast<int>(main_scores.size());
  std::vector<int> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  const int k = std::min(top_k, p);
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
    if (main_scores[static_cast<std::size_t>(a)] != main_scores[static_cast<std::size_t>(b)])
      return main_scores[static_cast<std::size_t>(a)] > main_scores[static_cast<std::size_t>(b)];
    return a < b;
  });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<std::pair<int, int>> adaptive_candidates(std::span<const double> main_scores,
                                                     int top_k) {
  const int p = static_cast<int>(main_scores.size());
  const std::vector<int> top = top_main_variables(main_scores, top_k);
  std::vector<char> anchor(static_cast<std::size_t>(p), 0);
  for (int v : top) anchor[static_cast<std::size_t>(v)] = 1;
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      if (anchor[static_cast<std::size_t>(i)] || anchor[static_cast<std::size_t>(j)])
        out.emplace_back(i, j);
  return out;
}

std::vector<std::size_t> kkt_postcheck(const Dataset& ds, const GroupIndex& index,
                                       std::span<const GroupId> universe,
                                       std::span<const char> in_working,
                                       const Eigen::VectorXd& v, double lambda, double tol,
                                       std::vector<double>& scores, int threads,
                                       std::int64_t* evals) {
  if (universe.size() != in_working.size() || universe.size() != scores.size())
    throw ConfigError("kkt_postcheck: span sizes differ");
  const std::int64_t u = static_cast<std::int64_t>(universe.size());
  std::int64_t done = 0;
  parallel_for(u, threads, [&](std::int64_t lo, std::int64_t hi) {
    Eigen::VectorXd scratch;
    for (std::int64_t pos = lo; pos < hi; ++pos) {
      if (in_working[static_cast<std::size_t>(pos)]) continue;
      const FeatureGroup g = index.make(ds, universe[static_cast<std::size_t>(pos)]);
      scores[static_cast<std::size_t>(pos)] = group_score(g, ds, v, scratch);
    }
  });
  // enumeration-default gamma is 1, so the threshold is shared
  const double bar = lambda * (1.0 + tol);
  std::vector<std::size_t> violators;
  for (std::int64_t pos = 0; pos < u; ++pos) {
    if (in_working[static_cast<std::size_t>(pos)]) continue;
    ++done;
    if (scores[static_cast<std::size_t>(pos)] > bar) violators.push_back(static_cast<std::size_t>(pos));
  }
  if (evals) *evals = done;
  return violators;
}

}  // namespace pairlasso
