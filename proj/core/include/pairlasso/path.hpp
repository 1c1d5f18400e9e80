#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pairlasso/screening.hpp"
#include "pairlasso/solver.hpp"

namespace pairlasso {

struct PathOptions {
  SolverConfig solver;
  ScreenConfig screen;
  // Explicit interaction universe; all p*(p-1)/2 pairs when absent. Main
  // effects are always part of the universe.
  std::optional<std::vector<std::pair<int, int>>> candidate_pairs;
  // Stop the grid after the lambda whose fit reaches this many distinct
  // discovered interactions. 0 means run the whole grid.
  int max_interactions = 0;
};

// First activation of a group along the path. Entries are ordered by the
// lambda of entry; within one lambda by entry score (the screening score that
// admitted the group) descending, group id ascending on ties.
struct Discovery {
  GroupId id = -1;
  int i = -1;
  int j = -1;        // -1 for main effects
  bool is_pair = false;
  int lambda_index = 0;
  double entry_score = 0.0;
};

struct PathResult {
  int p = 0;  // main-effect count; GroupIds below p are mains
  double lambda_max = 0.0;
  double null_intercept = 0.0;
  std::vector<double> lambdas;
  std::vector<ModelFit> fits;        // one per lambda actually fitted
  std::vector<ScreenAudit> audits;   // aligned with fits
  std::vector<Discovery> discoveries;
  std::int64_t universe_size = 0;

  std::vector<std::pair<int, int>> discovered_pairs() const;
};

// Fits the whole regularization path with warm starts. Screening scores are
// carried from one lambda to the next: the working set is the previous active
// set plus everything the (optionally adaptive) strong rule keeps, every
// outside group is KKT-checked after each fit, and violators trigger a refit
// (at most five rounds). Stored fits report the KKT residual over the entire
// universe, screened-out groups included.
PathResult fit_path(const Dataset& ds, const PathOptions& opt);

}  // namespace pairlasso
