#include "pairlasso/model_io.hpp"

#include <charconv>
#include <fstream>
#include <set>

#include <json.hpp>

namespace pairlasso {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return "0";
  return std::string(buf, ptr);
}

namespace {

json schema_to_json(const Schema& schema) {
  json arr = json::array();
  for (const auto& c : schema.columns) {
    json e;
    e["name"] = c.name;
    e["kind"] = c.kind == ColumnKind::categorical ? "cat" : "cont";
    if (c.kind == ColumnKind::categorical) e["levels"] = c.levels;
    arr.push_back(e);
  }
  return arr;
}

Schema schema_from_json(const json& arr) {
  Schema schema;
  for (const auto& e : arr) {
    ColumnSpec spec;
    spec.name = e.at("name").get<std::string>();
    const std::string kind = e.at("kind").get<std::string>();
    if (kind == "cat") {
      spec.kind = ColumnKind::categorical;
      spec.levels = e.at("levels").get<int>();
    } else if (kind == "cont") {
      spec.kind = ColumnKind::continuous;
    } else {
      throw DataError("model file: unknown column kind '" + kind + "'");
    }
    schema.columns.push_back(std::move(spec));
  }
  if (schema.columns.empty()) throw DataError("model file: empty schema");
  return schema;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < v.size(); ++r) arr.push_back(v[r]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  Eigen::Index r = 0;
  for (const auto& x : arr) v[r++] = x.get<double>();
  return v;
}

}  // namespace

std::string config_json(const ResolvedConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["data"] = cfg.data_path;
  j["schema"] = cfg.schema;
  j["response"] = cfg.response;
  j["family"] = family_name(cfg.family);
  j["nlambda"] = cfg.solver.lambda_count;
  j["lambda_min_ratio"] = cfg.solver.lambda_min_ratio;
  j["tol_kkt"] = cfg.solver.tol_kkt;
  j["tol_objective"] = cfg.solver.tol_objective;
  j["max_iter"] = cfg.solver.max_iter;
  j["backtrack"] = cfg.solver.backtrack;
  j["screen"] = screen_mode_name(cfg.screen.mode);
  j["top_k"] = cfg.screen.top_k;
  j["max_candidate_groups"] = cfg.screen.max_candidate_groups;
  j["max_interactions"] = cfg.max_interactions;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["out"] = cfg.out_dir;
  if (!cfg.design.empty()) j["design"] = json::parse(cfg.design);
  return j.dump();
}

void write_model_json(const std::string& path, const SavedModel& model) {
  json j;
  j["format"] = "pairlasso-model/1";
  j["config"] = model.config.empty() ? json::object() : json::parse(model.config);
  j["family"] = family_name(model.family);
  j["response"] = model.response;
  j["schema"] = schema_to_json(model.schema);

  json st = json::array();
  for (const auto& e : model.standardization.entries) {
    json s;
    s["column"] = e.column;
    s["name"] = e.name;
    s["center"] = e.center;
    s["scale"] = e.scale;
    st.push_back(s);
  }
  j["standardization"] = st;

  j["lambda"] = model.fit.lambda;
  j["intercept"] = model.fit.intercept;
  j["objective"] = model.fit.objective;
  j["kkt_max_violation"] = model.fit.kkt_max_violation;
  j["iterations"] = model.fit.iterations;

  json blocks = json::array();
  for (const auto& g : model.groups) {
    auto it = model.fit.coefficients.find(g.id);
    if (it == model.fit.coefficients.end()) continue;
    json b;
    b["id"] = g.id;
    b["kind"] = group_kind_name(g.kind);
    b["i"] = g.i;
    b["j"] = g.j;
    b["width"] = g.width;
    b["gamma"] = g.gamma;
    b["norm_scale"] = g.norm_scale;
    b["beta"] = vector_to_json(it->second);
    blocks.push_back(b);
  }
  j["blocks"] = blocks;

  const InteractionModel& m = model.effects;
  json eff;
  eff["intercept"] = m.intercept;
  eff["present"] = m.present;
  json tm = json::array();
  for (const auto& [v, vec] : m.theta_main) {
    json e;
    e["var"] = v;
    e["values"] = vector_to_json(vec);
    tm.push_back(e);
  }
  eff["theta_main"] = tm;
  json tp = json::array();
  for (const auto& [key, e] : m.theta_pair) {
    json t;
    t["i"] = e.i;
    t["j"] = e.j;
    t["kind"] = group_kind_name(e.kind);
    t["rows"] = e.theta.rows();
    t["cols"] = e.theta.cols();
    json vals = json::array();
    for (Eigen::Index a = 0; a < e.theta.rows(); ++a)
      for (Eigen::Index b = 0; b < e.theta.cols(); ++b) vals.push_back(e.theta(a, b));
    t["values"] = vals;
    tp.push_back(t);
  }
  eff["theta_pair"] = tp;
  json hi = json::array();
  for (const auto& r : m.hierarchy) {
    json h;
    h["i"] = r.i;
    h["j"] = r.j;
    h["parent_i_present"] = r.parent_i_present;
    h["parent_j_present"] = r.parent_j_present;
    hi.push_back(h);
  }
  eff["hierarchy"] = hi;
  j["effects"] = eff;

  std::ofstream f(path);
  if (!f.good()) throw DataError("cannot write '" + path + "'");
  f << j.dump(2) << "\n";
  if (!f.good()) throw DataError("failed while writing '" + path + "'");
}

SavedModel read_model_json(const std::string& path) {
  std::ifstream f(path);
  if (!f.good()) throw DataError("cannot open '" + path + "'");
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw DataError("'" + path + "' is not valid JSON: " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "pairlasso-model/1")
      throw DataError("'" + path + "' has an unknown model format");
    SavedModel model;
    model.config = j.at("config").dump();
    model.family = family_from_name(j.at("family").get<std::string>());
    model.response = j.at("response").get<std::string>();
    model.schema = schema_from_json(j.at("schema"));
    for (const auto& s : j.at("standardization")) {
      Standardization::Entry e;
      e.column = s.at("column").get<int>();
      e.name = s.at("name").get<std::string>();
      e.center = s.at("center").get<double>();
      e.scale = s.at("scale").get<double>();
      model.standardization.entries.push_back(std::move(e));
    }
    model.fit.lambda = j.at("lambda").get<double>();
    model.fit.intercept = j.at("intercept").get<double>();
    model.fit.objective = j.at("objective").get<double>();
    model.fit.kkt_max_violation = j.at("kkt_max_violation").get<double>();
    model.fit.iterations = j.at("iterations").get<int>();
    for (const auto& b : j.at("blocks")) {
      FeatureGroup g;
      g.id = b.at("id").get<GroupId>();
      g.kind = group_kind_from_name(b.at("kind").get<std::string>());
      g.i = b.at("i").get<int>();
      g.j = b.at("j").get<int>();
      g.width = b.at("width").get<int>();
      g.gamma = b.at("gamma").get<double>();
      g.norm_scale = b.at("norm_scale").get<double>();
      Eigen::VectorXd beta = vector_from_json(b.at("beta"));
      if (beta.size() != g.width) throw DataError("model block width mismatch in '" + path + "'");
      model.fit.coefficients[g.id] = std::move(beta);
      model.groups.push_back(g);
    }
    const json& eff = j.at("effects");
    InteractionModel& m = model.effects;
    m.family = model.family;
    for (const auto& c : model.schema.columns) {
      m.names.push_back(c.name);
      m.kinds.push_back(c.kind);
      m.levels.push_back(c.levels);
    }
    m.intercept = eff.at("intercept").get<double>();
    m.present = eff.at("present").get<std::vector<int>>();
    for (const auto& e : eff.at("theta_main"))
      m.theta_main[e.at("var").get<int>()] = vector_from_json(e.at("values"));
    for (const auto& t : eff.at("theta_pair")) {
      InteractionEffect e;
      e.i = t.at("i").get<int>();
      e.j = t.at("j").get<int>();
      e.kind = group_kind_from_name(t.at("kind").get<std::string>());
      const Eigen::Index rows = t.at("rows").get<Eigen::Index>();
      const Eigen::Index cols = t.at("cols").get<Eigen::Index>();
      const auto& vals = t.at("values");
      if (static_cast<Eigen::Index>(vals.size()) != rows * cols)
        throw DataError("model effect size mismatch in '" + path + "'");
      e.theta.resize(rows, cols);
      Eigen::Index idx = 0;
      for (const auto& x : vals) {
        e.theta(idx / cols, idx % cols) = x.get<double>();
        ++idx;
      }
      m.theta_pair[{e.i, e.j}] = std::move(e);
    }
    for (const auto& h : eff.at("hierarchy")) {
      PairReport r;
      r.i = h.at("i").get<int>();
      r.j = h.at("j").get<int>();
      r.parent_i_present = h.at("parent_i_present").get<bool>();
      r.parent_j_present = h.at("parent_j_present").get<bool>();
      m.hierarchy.push_back(r);
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError("'" + path + "' is missing model fields: " + e.what());
  }
}

namespace {

std::ofstream open_csv(const std::string& path, const std::string& config) {
  std::ofstream f(path);
  if (!f.good()) throw DataError("cannot write '" + path + "'");
  f << "# pairlasso config=" << config << "\n";
  return f;
}

}  // namespace

void write_path_summary(const std::string& path, const PathResult& result,
                        const std::string& config) {
  std::ofstream f = open_csv(path, config);
  f << "lambda_index,lambda,active_mains,active_pairs,objective,kkt_max_violation,iterations\n";
  for (std::size_t k = 0; k < result.fits.size(); ++k) {
    const ModelFit& fit = result.fits[k];
    int mains = 0, pairs = 0;
    for (const auto& [id, beta] : fit.coefficients)
      (id < result.p ? mains : pairs) += 1;
    f << k << ',' << format_double(fit.lambda) << ',' << mains << ',' << pairs << ','
      << format_double(fit.objective) << ',' << format_double(fit.kkt_max_violation) << ','
      << fit.iterations << "\n";
  }
  if (!f.good()) throw DataError("failed while writing '" + path + "'");
}

void write_screen_audit(const std::string& path, const PathResult& result,
                        const std::string& config) {
  std::ofstream f = open_csv(path, config);
  f << "lambda_index,lambda,universe,candidates,working,kkt_failures,refit_rounds,score_evals\n";
  for (const auto& a : result.audits)
    f << a.lambda_index << ',' << format_double(a.lambda) << ',' << a.universe << ','
      << a.candidates << ',' << a.working << ',' << a.kkt_failures << ',' << a.refit_rounds
      << ',' << a.score_evals << "\n";
  if (!f.good()) throw DataError("failed while writing '" + path + "'");
}

void write_discoveries(const std::string& path, const PathResult& result,
                       const std::vector<std::string>& names, const std::string& config) {
  std::ofstream f = open_csv(path, config);
  f << "order,lambda_index,lambda,kind,var_i,var_j,name_i,name_j,entry_score\n";
  int order = 0;
  for (const auto& d : result.discoveries) {
    const std::string ni = d.i >= 0 ? names.at(static_cast<std::size_t>(d.i)) : "";
    const std::string nj = d.j >= 0 ? names.at(static_cast<std::size_t>(d.j)) : "";
    f << order++ << ',' << d.lambda_index << ','
      << format_double(result.lambdas.at(static_cast<std::size_t>(d.lambda_index))) << ','
      << (d.is_pair ? "pair" : "main") << ',' << d.i << ',' << d.j << ',' << ni << ',' << nj
      << ',' << format_double(d.entry_score) << "\n";
  }
  if (!f.good()) throw DataError("failed while writing '" + path + "'");
}

void write_predictions(const std::string& path, const Eigen::VectorXd& linear,
                       const Eigen::VectorXd& response, Family family,
                       const std::string& config) {
  std::ofstream f = open_csv(path, config);
  if (family == Family::binomial) {
    f << "row,linear,probability\n";
    for (Eigen::Index r = 0; r < linear.size(); ++r)
      f << r << ',' << format_double(linear[r]) << ',' << format_double(response[r]) << "\n";
  } else {
    f << "row,prediction\n";
    for (Eigen::Index r = 0; r < linear.size(); ++r)
      f << r << ',' << format_double(linear[r]) << "\n";
  }
  if (!f.good()) throw DataError("failed while writing '" + path + "'");
}

void write_fdr_curve(const std::string& path, const FdrCurve& curve, const std::string& config) {
  std::ofstream f = open_csv(path, config);
  f << "k,mean_fdr,se\n";
  for (int k = 1; k <= curve.k_max; ++k)
    f << k << ',' << format_double(curve.mean_fdr[static_cast<std::size_t>(k - 1)]) << ','
      << format_double(curve.se[static_cast<std::size_t>(k - 1)]) << "\n";
  if (!f.good()) throw DataError("failed while writing '" + path + "'");
}

void write_bench_runs(const std::string& path, const std::vector<DiscoveryRun>& runs,
                      const std::string& config) {
  std::ofstream f = open_csv(path, config);
  f << "replicate,rank,var_i,var_j,is_true\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const std::set<std::pair<int, int>> truth(runs[r].truth.begin(), runs[r].truth.end());
    for (std::size_t t = 0; t < runs[r].found.size(); ++t) {
      const auto& pr = runs[r].found[t];
      f << r << ',' << t + 1 << ',' << pr.first << ',' << pr.second << ','
        << (truth.count(pr) ? 1 : 0) << "\n";
    }
  }
  if (!f.good()) throw DataError("failed while writing '" + path + "'");
}

}  // namespace pairlasso
