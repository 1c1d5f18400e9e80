#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pairlasso/groups.hpp"
#include "pairlasso/types.hpp"

namespace pairlasso {

struct ScreenConfig {
  enum class Mode { none, strong_rules, adaptive };
  Mode mode = Mode::strong_rules;
  int top_k = 100;                              // adaptive: main effects kept as anchors
  std::int64_t max_candidate_groups = 20000000; // safety budget on any working set

  void validate(int p) const;
};

const char* screen_mode_name(ScreenConfig::Mode m);
ScreenConfig::Mode screen_mode_from_name(const std::string& s);

// Sequential strong rule: keep group k iff it is already active or
// score_k / gamma_k >= 2*lambda - lambda_prev. Masks align with the spans.
std::vector<char> strong_keep(std::span<const double> scores, std::span<const double> gammas,
                              std::span<const char> active, double lambda, double lambda_prev);

// Indices of the top_k main variables by score, ties resolved toward the
// lower index. Returns all of them when top_k >= p.
std::vector<int> top_main_variables(std::span<const double> main_scores, int top_k);

// Pairs eligible under the adaptive rule: at least one endpoint in the top_k
// anchor set. Sorted lexicographically.
std::vector<std::pair<int, int>> adaptive_candidates(std::span<const double> main_scores,
                                                     int top_k);

// Post-fit safety net: scans every universe position not in the working set,
// computes its score ||X_g^T v|| against the gradient vector v of the fitted
// model, stores it in `scores`, and reports positions with
// score > lambda * gamma * (1 + tol). Groups are built on demand from the
// GroupIndex (enumeration-default gamma = 1), so the universe is never
// materialized as FeatureGroups. evals counts scored positions.
std::vector<std::size_t> kkt_postcheck(const Dataset& ds, const GroupIndex& index,
                                       std::span<const GroupId> universe,
                                       std::span<const char> in_working,
                                       const Eigen::VectorXd& v, double lambda, double tol,
                                       std::vector<double>& scores, int threads,
                                       std::int64_t* evals = nullptr);

// Per-lambda accounting of the screen: sizes, repair rounds, and how many
// fresh score evaluations were spent (reuse means this stays at
// universe - working for a clean lambda).
struct ScreenAudit {
  int lambda_index = 0;
  double lambda = 0.0;
  std::int64_t universe = 0;
  std::int64_t candidates = 0;   // groups passing the adaptive gate (or all)
  std::int64_t working = 0;      // final working set after repairs
  std::int64_t kkt_failures = 0; // violators found by postchecks at this lambda
  int refit_rounds = 0;
  std::int64_t score_evals = 0;  // postcheck score computations at this lambda
};

}  // namespace pairlasso
