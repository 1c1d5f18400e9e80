#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pairlasso/dataset.hpp"
#include "pairlasso/path.hpp"
#include "pairlasso/types.hpp"

namespace pairlasso {

// How the planted truth relates main effects and interactions.
enum class TruthKind {
  strong,  // interactions only between planted main-effect variables
  weak,    // each interaction has exactly one planted parent
  anti,    // interactions between variables with no planted main effect
  pure     // interactions only, no main effects at all
};

const char* truth_kind_name(TruthKind t);
TruthKind truth_kind_from_name(const std::string& s);

struct SimDesign {
  int n = 100;
  int p = 10;
  ColumnKind var_kind = ColumnKind::continuous;  // one kind for all variables
  int levels = 3;                                // categorical only
  TruthKind truth = TruthKind::strong;
  int n_main = 5;
  int n_int = 5;
  double snr = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SimTruth {
  std::vector<int> mains;
  std::vector<std::pair<int, int>> pairs;
  Eigen::VectorXd signal;  // noiseless linear predictor
  double noise_sd = 0.0;
};

// Draws features (independent N(0,1) continuous values or uniform levels),
// plants centered N(0,1) effect coefficients according to the truth kind and
// adds gaussian noise scaled so var(signal)/var(noise) = snr. Same seed, same
// bytes: all randomness goes through explicit mt19937_64 transforms, never
// through distribution objects with unspecified state use.
std::pair<Dataset, SimTruth> simulate(const SimDesign& design);

struct DiscoveryRun {
  std::vector<std::pair<int, int>> found;  // in discovery order
  std::vector<std::pair<int, int>> truth;
};

struct FdrCurve {
  int k_max = 0;
  std::vector<double> mean_fdr;  // index k-1: mean over runs of FDR at k
  std::vector<double> se;        // standard error of that mean
};

// FDR at k = (false discoveries among the first k) / k, averaged over runs.
// Every run must have discovered at least k_max pairs.
FdrCurve fdr_curve(std::span<const DiscoveryRun> runs, int k_max);

struct ClassificationMetrics {
  double zero_one = 0.0;       // miss rate at threshold 1/2
  double auc = 0.0;            // rank statistic, ties count 1/2
  double cross_entropy = 0.0;  // probabilities clamped at 1e-12
};

ClassificationMetrics classification_metrics(const Eigen::VectorXd& y_true,
                                             const Eigen::VectorXd& p_hat);

struct BenchConfig {
  SimDesign design;
  int replicates = 20;
  int k_max = 10;       // discoveries required per run
  PathOptions path;     // max_interactions is set from k_max
};

struct BenchResult {
  FdrCurve curve;
  std::vector<DiscoveryRun> runs;
};

// Replicated fit-and-score loop: replicate r uses seed design.seed + r,
// standardizes, runs the path until k_max interactions are found and records
// the discovery order against the planted truth.
BenchResult run_fdr_bench(const BenchConfig& cfg);

// FDR curve of ranking k_max uniformly random distinct pairs per replicate,
// same truth draw as the bench; the do-nothing baseline.
FdrCurve random_pair_baseline(const BenchConfig& cfg);

}  // namespace pairlasso
