// Command line front end: fit interaction paths, predict from saved models,
// run self-contained recovery benchmarks.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pairlasso/model_io.hpp"
#include "pairlasso/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pairlasso;

namespace {

struct CommonFlags {
  std::string family = "gaussian";
  int nlambda = 50;
  double lambda_min_ratio = 0.01;
  std::string screen = "strong";
  int top_k = 100;
  int max_interactions = 0;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out;
};

void add_solver_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--family", f.family, "Response family: gaussian or binomial")
      ->check(CLI::IsMember({"gaussian", "binomial"}));
  cmd->add_option("--nlambda", f.nlambda, "Number of path grid points")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--lambda-min-ratio", f.lambda_min_ratio,
                  "Smallest lambda as a fraction of lambda_max");
  cmd->add_option("--screen", f.screen, "Candidate screening: none, strong or adaptive")
      ->check(CLI::IsMember({"none", "strong", "adaptive"}));
  cmd->add_option("--top-k", f.top_k, "Adaptive screen: number of anchor main effects")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-interactions", f.max_interactions,
                  "Stop the path after this many discovered interactions (0 = run it all)");
  cmd->add_option("--seed", f.seed, "Random seed (recorded; drives simulate)");
  cmd->add_option("--threads", f.threads,
                  "Worker threads (0 = PAIRLASSO_THREADS env or hardware)");
  cmd->add_option("--out", f.out, "Output directory")->required();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f.good()) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// The response is the one header column the schema does not claim.
std::string detect_response(const std::string& data_path, const Schema& schema) {
  std::ifstream f(data_path);
  if (!f.good()) throw DataError("cannot open '" + data_path + "'");
  std::string line;
  if (!std::getline(f, line)) throw DataError("'" + data_path + "' is empty");
  std::set<std::string> known;
  for (const auto& c : schema.columns) known.insert(c.name);
  std::vector<std::string> extra;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) pos = line.size();
    std::string name = line.substr(start, pos - start);
    while (!name.empty() && (name.back() == '\r' || name.back() == ' ')) name.pop_back();
    while (!name.empty() && name.front() == ' ') name.erase(name.begin());
    if (!known.count(name)) extra.push_back(name);
    start = pos + 1;
  }
  if (extra.size() != 1)
    throw DataError("expected exactly one non-schema column as the response in '" + data_path +
                    "', found " + std::to_string(extra.size()));
  return extra[0];
}

PathOptions path_options(const CommonFlags& f) {
  PathOptions opt;
  opt.solver.lambda_count = f.nlambda;
  opt.solver.lambda_min_ratio = f.lambda_min_ratio;
  opt.solver.threads = f.threads;
  opt.screen.mode = screen_mode_from_name(f.screen);
  opt.screen.top_k = f.top_k;
  opt.max_interactions = f.max_interactions;
  return opt;
}

ResolvedConfig resolved(const std::string& command, const CommonFlags& f,
                        const std::string& data, const std::string& schema,
                        const std::string& response) {
  ResolvedConfig cfg;
  cfg.command = command;
  cfg.data_path = data;
  cfg.schema = schema;
  cfg.response = response;
  cfg.family = family_from_name(f.family);
  cfg.solver.lambda_count = f.nlambda;
  cfg.solver.lambda_min_ratio = f.lambda_min_ratio;
  cfg.screen.mode = screen_mode_from_name(f.screen);
  cfg.screen.top_k = f.top_k;
  cfg.max_interactions = f.max_interactions;
  cfg.seed = f.seed;
  cfg.threads = thread_budget(f.threads);
  cfg.out_dir = f.out;
  return cfg;
}

int cmd_fit(const std::string& data_path, const std::string& schema_arg, const CommonFlags& f) {
  const Schema schema = parse_schema(schema_arg);
  const std::string response = detect_response(data_path, schema);
  const Family family = family_from_name(f.family);
  const Dataset raw = load_csv(data_path, schema, response, family);
  auto [ds, st] = standardize(raw);

  ResolvedConfig cfg = resolved("fit", f, data_path, format_schema(schema), response);
  const std::string cfg_json = config_json(cfg);

  const PathOptions opt = path_options(f);
  const PathResult path = fit_path(ds, opt);

  fs::create_directories(f.out);
  write_path_summary((fs::path(f.out) / "path_summary.csv").string(), path, cfg_json);
  write_screen_audit((fs::path(f.out) / "screen_audit.csv").string(), path, cfg_json);
  std::vector<std::string> names;
  for (const auto& c : ds.columns) names.push_back(c.name);
  write_discoveries((fs::path(f.out) / "discoveries.csv").string(), path, names, cfg_json);

  // final (smallest lambda) model, effects included
  const GroupIndex index(ds);
  const ModelFit& fit = path.fits.back();
  SavedModel model;
  model.fit = fit;
  model.fit.fitted_linear.resize(0);  // training predictions stay out of the file
  for (const auto& [id, beta] : fit.coefficients) model.groups.push_back(index.make(ds, id));
  model.schema = schema_of(ds);
  model.response = response;
  model.standardization = st;
  model.family = family;
  model.effects = extract_model(fit, model.groups, st, model.schema, family);
  model.config = cfg_json;
  write_model_json((fs::path(f.out) / "model.json").string(), model);

  std::cout << "fit: " << path.fits.size() << " lambdas, lambda_max "
            << format_double(path.lambda_max) << ", final model has "
            << fit.coefficients.size() << " active groups -> " << f.out << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out) {
  const SavedModel model = read_model_json(model_path);
  // accept files with or without the training response column
  bool has_response = false;
  {
    std::ifstream f(data_path);
    if (!f.good()) throw DataError("cannot open '" + data_path + "'");
    std::string line;
    std::getline(f, line);
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) {
      while (!name.empty() && (name.back() == '\r' || name.back() == ' ')) name.pop_back();
      if (name == model.response) has_response = true;
    }
  }
  const Dataset raw =
      load_csv(data_path, model.schema, has_response ? model.response : "", model.family);
  const Dataset ds = apply_standardization(raw, model.standardization);

  const Eigen::VectorXd linear = predict_linear(model.fit, model.groups, ds);
  const Eigen::VectorXd response = model.family == Family::binomial
                                       ? predict_response(model.fit, model.groups, ds, model.family)
                                       : linear;

  ResolvedConfig cfg;
  cfg.command = "predict";
  cfg.data_path = data_path;
  cfg.schema = format_schema(model.schema);
  cfg.response = model.response;
  cfg.family = model.family;
  cfg.out_dir = out;
  const std::string cfg_json = config_json(cfg);

  fs::create_directories(out);
  write_predictions((fs::path(out) / "predictions.csv").string(), linear, response, model.family,
                    cfg_json);
  std::cout << "predict: " << linear.size() << " rows -> " << out << "\n";
  return 0;
}

int cmd_simulate(const std::string& design_path, const CommonFlags& f, bool seed_given) {
  json dj;
  try {
    dj = json::parse(slurp(design_path));
  } catch (const json::exception& e) {
    throw ConfigError("design file '" + design_path + "' is not valid JSON: " + e.what());
  }

  BenchConfig bench;
  try {
    SimDesign& d = bench.design;
    d.n = dj.at("n").get<int>();
    d.p = dj.at("p").get<int>();
    const std::string kind = dj.value("kind", std::string("cont"));
    if (kind == "cont") {
      d.var_kind = ColumnKind::continuous;
    } else if (kind == "cat") {
      d.var_kind = ColumnKind::categorical;
      d.levels = dj.at("levels").get<int>();
    } else {
      throw ConfigError("design kind must be cont or cat");
    }
    d.truth = truth_kind_from_name(dj.at("truth").get<std::string>());
    d.n_main = dj.value("n_main", 0);
    d.n_int = dj.at("n_int").get<int>();
    d.snr = dj.value("snr", 1.0);
    d.seed = dj.value("seed", std::uint64_t{1});
    bench.replicates = dj.value("replicates", 20);
    bench.k_max = dj.at("k_max").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError("design file '" + design_path + "' is missing fields: " + e.what());
  }
  if (seed_given) bench.design.seed = f.seed;
  bench.design.validate();
  bench.path = path_options(f);

  json resolved_design;
  resolved_design["n"] = bench.design.n;
  resolved_design["p"] = bench.design.p;
  resolved_design["kind"] =
      bench.design.var_kind == ColumnKind::categorical ? "cat" : "cont";
  if (bench.design.var_kind == ColumnKind::categorical)
    resolved_design["levels"] = bench.design.levels;
  resolved_design["truth"] = truth_kind_name(bench.design.truth);
  resolved_design["n_main"] = bench.design.n_main;
  resolved_design["n_int"] = bench.design.n_int;
  resolved_design["snr"] = bench.design.snr;
  resolved_design["seed"] = bench.design.seed;
  resolved_design["replicates"] = bench.replicates;
  resolved_design["k_max"] = bench.k_max;

  ResolvedConfig cfg = resolved("simulate", f, design_path, "", "y");
  cfg.seed = bench.design.seed;
  cfg.design = resolved_design.dump();
  const std::string cfg_json = config_json(cfg);

  const BenchResult result = run_fdr_bench(bench);
  const FdrCurve baseline = random_pair_baseline(bench);

  fs::create_directories(f.out);
  write_fdr_curve((fs::path(f.out) / "fdr_curve.csv").string(), result.curve, cfg_json);
  write_fdr_curve((fs::path(f.out) / "fdr_baseline.csv").string(), baseline, cfg_json);
  write_bench_runs((fs::path(f.out) / "runs.csv").string(), result.runs, cfg_json);

  std::cout << "simulate: " << bench.replicates << " replicates, FDR at " << bench.k_max
            << " = " << format_double(result.curve.mean_fdr.back()) << " (se "
            << format_double(result.curve.se.back()) << "), random baseline "
            << format_double(baseline.mean_fdr.back()) << " -> " << f.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pairlasso: hierarchical pairwise-interaction group lasso"};
  app.require_subcommand(1);

  std::string fit_data, fit_schema;
  CommonFlags fit_flags;
  CLI::App* fit = app.add_subcommand("fit", "Fit a regularization path");
  fit->add_option("--data", fit_data, "Training CSV (header row; response included)")->required();
  fit->add_option("--schema", fit_schema,
                  "Feature schema: 'name:cat:L,name:cont,...' or a file holding it")
      ->required();
  add_solver_flags(fit, fit_flags);

  std::string pr_model, pr_data, pr_out;
  CLI::App* predict = app.add_subcommand("predict", "Predict from a saved model");
  predict->add_option("--model", pr_model, "model.json from a fit run")->required();
  predict->add_option("--data", pr_data, "CSV with the training feature columns")->required();
  predict->add_option("--out", pr_out, "Output directory")->required();

  std::string sim_design;
  CommonFlags sim_flags;
  CLI::App* simulate = app.add_subcommand("simulate", "Recovery benchmark on synthetic data");
  simulate->add_option("--design", sim_design, "Design JSON file")->required();
  add_solver_flags(simulate, sim_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_data, fit_schema, fit_flags);
    if (predict->parsed()) return cmd_predict(pr_model, pr_data, pr_out);
    if (simulate->parsed())
      return cmd_simulate(sim_design, sim_flags, simulate->count("--seed") > 0);
    std::cerr << "usage error: no subcommand\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
