#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pairlasso/hierarchy.hpp"
#include "pairlasso/path.hpp"
#include "pairlasso/simulation.hpp"

namespace pairlasso {

// Everything that determined a run; serialized into every output so results
// can be reproduced from the file alone.
struct ResolvedConfig {
  std::string command;
  std::string data_path;
  std::string schema;
  std::string response;
  Family family = Family::gaussian;
  SolverConfig solver;
  ScreenConfig screen;
  int max_interactions = 0;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir;
  std::string design;  // simulate: compact JSON of the resolved design
};

// Canonical one-line JSON (sorted keys, shortest round-trip numbers) so that
// equal configs serialize to equal bytes.
std::string config_json(const ResolvedConfig& cfg);

// Shortest decimal that parses back to the same double; fixed across runs.
std::string format_double(double v);

struct SavedModel {
  ModelFit fit;
  std::vector<FeatureGroup> groups;  // every group with a stored block
  Schema schema;
  std::string response;
  Standardization standardization;
  Family family = Family::gaussian;
  InteractionModel effects;
  std::string config;  // config_json of the producing run
};

void write_model_json(const std::string& path, const SavedModel& model);
SavedModel read_model_json(const std::string& path);

// CSV writers; every file starts with a "# pairlasso <command> config=..."
// provenance line. Numbers are written with format_double.
void write_path_summary(const std::string& path, const PathResult& result,
                        const std::string& config);
void write_screen_audit(const std::string& path, const PathResult& result,
                        const std::string& config);
void write_discoveries(const std::string& path, const PathResult& result,
                       const std::vector<std::string>& names, const std::string& config);
void write_predictions(const std::string& path, const Eigen::VectorXd& linear,
                       const Eigen::VectorXd& response, Family family,
                       const std::string& config);
void write_fdr_curve(const std::string& path, const FdrCurve& curve, const std::string& config);
void write_bench_runs(const std::string& path, const std::vector<DiscoveryRun>& runs,
                      const std::string& config);

}  // namespace pairlasso
