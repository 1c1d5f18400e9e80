#include "pairlasso/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pairlasso {

EffectDecomposition decompose_cat_cat(const Eigen::VectorXd& beta, int L1, int L2) {
  if (beta.size() != static_cast<Eigen::Index>(L1) * L2)
    throw ConfigError("decompose_cat_cat: block size is not L1*L2");
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> B(beta.data(), L1, L2);

  EffectDecomposition d;
  d.kind = GroupKind::cat_cat;
  d.L1 = L1;
  d.L2 = L2;
  d.mu_tilde = B.mean();
  d.alpha1 = B.rowwise().mean().array() - d.mu_tilde;
  d.alpha2 = B.colwise().mean().array() - d.mu_tilde;
  d.alpha12.resize(L1, L2);
  for (int a = 0; a < L1; ++a)
    for (int b = 0; b < L2; ++b)
      d.alpha12(a, b) = B(a, b) - d.mu_tilde - d.alpha1[a] - d.alpha2[b];
  return d;
}

EffectDecomposition decompose_cat_cont(const Eigen::VectorXd& beta, int L) {
  if (beta.size() != 2 * static_cast<Eigen::Index>(L))
    throw ConfigError("decompose_cat_cont: block size is not 2L");
  EffectDecomposition d;
  d.kind = GroupKind::cat_cont;
  d.L1 = L;
  d.L2 = 1;
  const auto offsets = beta.head(L);
  const auto slopes = beta.tail(L);
  d.mu_tilde = offsets.mean();
  d.alpha1 = offsets.array() - d.mu_tilde;
  d.alpha2.resize(1);
  d.alpha2[0] = slopes.mean();
  d.alpha12 = (slopes.array() - d.alpha2[0]).matrix();
  return d;
}

EffectDecomposition decompose_cont_cont(const Eigen::VectorXd& beta) {
  if (beta.size() != 4) throw ConfigError("decompose_cont_cont: block size is not 4");
  EffectDecomposition d;
  d.kind = GroupKind::cont_cont;
  d.L1 = 1;
  d.L2 = 1;
  d.mu_tilde = beta[0];
  d.alpha1 = beta.segment(1, 1);
  d.alpha2 = beta.segment(2, 1);
  d.alpha12.resize(1, 1);
  d.alpha12(0, 0) = beta[3];
  return d;
}

Eigen::VectorXd recompose(const EffectDecomposition& d) {
  switch (d.kind) {
    case GroupKind::cat_cat: {
      Eigen::VectorXd beta(static_cast<Eigen::Index>(d.L1) * d.L2);
      for (int a = 0; a < d.L1; ++a)
        for (int b = 0; b < d.L2; ++b)
          beta[a * d.L2 + b] = d.mu_tilde + d.alpha1[a] + d.alpha2[b] + d.alpha12(a, b);
      return beta;
    }
    case GroupKind::cat_cont: {
      Eigen::VectorXd beta(2 * static_cast<Eigen::Index>(d.L1));
      beta.head(d.L1) = d.alpha1.array() + d.mu_tilde;
      beta.tail(d.L1) = d.alpha12.col(0).array() + d.alpha2[0];
      return beta;
    }
    case GroupKind::cont_cont: {
      Eigen::VectorXd beta(4);
      beta << d.mu_tilde, d.alpha1[0], d.alpha2[0], d.alpha12(0, 0);
      return beta;
    }
    default:
      throw ConfigError("recompose: not an interaction decomposition");
  }
}

Schema schema_of(const Dataset& ds) {
  Schema s;
  for (const auto& c : ds.columns) s.columns.push_back({c.name, c.kind, c.levels});
  return s;
}

namespace {

struct StdInfo {
  double center = 0.0;
  double scale = 1.0;
};

}  // namespace

InteractionModel extract_model(const ModelFit& fit, std::span<const FeatureGroup> groups,
                               const Standardization& st, const Schema& schema, Family family) {
  const int p = static_cast<int>(schema.columns.size());
  InteractionModel m;
  m.family = family;
  m.intercept = fit.intercept;
  for (const auto& c : schema.columns) {
    m.names.push_back(c.name);
    m.kinds.push_back(c.kind);
    m.levels.push_back(c.levels);
  }

  std::vector<StdInfo> sc(static_cast<std::size_t>(p));
  for (const auto& e : st.entries) {
    if (e.column < 0 || e.column >= p)
      throw ConfigError("standardization entry out of range");
    sc[static_cast<std::size_t>(e.column)] = {e.center, e.scale};
  }

  std::map<GroupId, const FeatureGroup*> by_id;
  for (const auto& g : groups) by_id[g.id] = &g;

  auto cat_main = [&](int v) -> Eigen::VectorXd& {
    auto it = m.theta_main.find(v);
    if (it == m.theta_main.end())
      it = m.theta_main.emplace(v, Eigen::VectorXd::Zero(m.levels[static_cast<std::size_t>(v)]))
               .first;
    return it->second;
  };
  auto cont_main = [&](int v) -> double& {
    auto it = m.theta_main.find(v);
    if (it == m.theta_main.end()) it = m.theta_main.emplace(v, Eigen::VectorXd::Zero(1)).first;
    return it->second[0];
  };

  // standardized-unit accumulators for continuous mains, converted at the end
  std::map<int, double> t_std;

  for (const auto& [id, raw_beta] : fit.coefficients) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw ConfigError("fit block " + std::to_string(id) + " missing from the group span");
    const FeatureGroup& g = *it->second;
    if (raw_beta.size() != g.width)
      throw ConfigError("fit block " + std::to_string(id) + " width mismatch");
    const Eigen::VectorXd b = g.norm_scale * raw_beta;  // effective block on standardized data

    switch (g.kind) {
      case GroupKind::cat_main:
        cat_main(g.i) += b;
        break;
      case GroupKind::cont_main:
        t_std[g.i] += b[0];
        break;
      case GroupKind::cat_cat: {
        const int L1 = m.levels[static_cast<std::size_t>(g.i)];
        const int L2 = m.levels[static_cast<std::size_t>(g.j)];
        const EffectDecomposition d = decompose_cat_cat(b, L1, L2);
        m.intercept += d.mu_tilde;
        cat_main(g.i) += d.alpha1;
        cat_main(g.j) += d.alpha2;
        if (!d.alpha12.isZero(0.0)) {
          InteractionEffect e;
          e.i = g.i;
          e.j = g.j;
          e.kind = GroupKind::cat_cat;
          e.theta = d.alpha12;
          m.theta_pair[{g.i, g.j}] = std::move(e);
        }
        break;
      }
      case GroupKind::cat_cont: {
        const bool i_cat = m.kinds[static_cast<std::size_t>(g.i)] == ColumnKind::categorical;
        const int u = i_cat ? g.i : g.j;  // categorical side
        const int w = i_cat ? g.j : g.i;  // continuous side
        const int L = m.levels[static_cast<std::size_t>(u)];
        const EffectDecomposition d = decompose_cat_cont(b, L);
        const StdInfo& sw = sc[static_cast<std::size_t>(w)];
        m.intercept += d.mu_tilde;
        cat_main(u) += d.alpha1;
        t_std[w] += d.alpha2[0];
        // per-level slopes on z_w become slopes on raw x_w plus a level offset
        if (!d.alpha12.isZero(0.0)) {
          InteractionEffect e;
          e.i = g.i;
          e.j = g.j;
          e.kind = GroupKind::cat_cont;
          e.theta = d.alpha12 / sw.scale;
          m.theta_pair[{g.i, g.j}] = std::move(e);
          cat_main(u) -= d.alpha12.col(0) * (sw.center / sw.scale);
        }
        break;
      }
      case GroupKind::cont_cont: {
        const EffectDecomposition d = decompose_cont_cont(b);
        const StdInfo& si = sc[static_cast<std::size_t>(g.i)];
        const StdInfo& sj = sc[static_cast<std::size_t>(g.j)];
        m.intercept += d.mu_tilde;
        t_std[g.i] += d.alpha1[0];
        t_std[g.j] += d.alpha2[0];
        const double T = d.alpha12(0, 0);
        if (T != 0.0) {
          const double denom = si.scale * sj.scale;
          InteractionEffect e;
          e.i = g.i;
          e.j = g.j;
          e.kind = GroupKind::cont_cont;
          e.theta.resize(1, 1);
          e.theta(0, 0) = T / denom;
          m.theta_pair[{g.i, g.j}] = std::move(e);
          cont_main(g.i) += -T * sj.center / denom;
          cont_main(g.j) += -T * si.center / denom;
          m.intercept += T * si.center * sj.center / denom;
        }
        break;
      }
    }
  }

  // continuous mains: coefficient on z = (x - c)/s becomes one on x
  for (const auto& [v, t] : t_std) {
    const StdInfo& s = sc[static_cast<std::size_t>(v)];
    cont_main(v) += t / s.scale;
    m.intercept -= t * s.center / s.scale;
  }

  // categorical mains: shift the level mean into the intercept so each vector
  // sums to zero (the optimum has mean zero already; this makes it exact)
  for (auto& [v, vec] : m.theta_main) {
    if (m.kinds[static_cast<std::size_t>(v)] != ColumnKind::categorical) continue;
    const double mean = vec.mean();
    vec.array() -= mean;
    m.intercept += mean;
  }

  std::set<int> present;
  for (const auto& [v, vec] : m.theta_main)
    if (!vec.isZero(0.0)) present.insert(v);
  for (const auto& [key, e] : m.theta_pair) {
    present.insert(key.first);
    present.insert(key.second);
    PairReport r;
    r.i = key.first;
    r.j = key.second;
    m.hierarchy.push_back(r);
  }
  m.present.assign(present.begin(), present.end());
  for (auto& r : m.hierarchy) {
    r.parent_i_present = present.count(r.i) != 0;
    r.parent_j_present = present.count(r.j) != 0;
  }
  return m;
}

Eigen::VectorXd predict_effects(const InteractionModel& model, const Dataset& raw) {
  const int p = static_cast<int>(model.names.size());
  if (raw.p() != p) throw DataError("predict_effects: column count mismatch");
  for (int v = 0; v < p; ++v) {
    const Column& c = raw.columns[static_cast<std::size_t>(v)];
    if (c.kind != model.kinds[static_cast<std::size_t>(v)] || c.name != model.names[static_cast<std::size_t>(v)])
      throw DataError("predict_effects: column '" + c.name + "' does not match the model");
    if (c.kind == ColumnKind::categorical && c.levels != model.levels[static_cast<std::size_t>(v)])
      throw DataError("predict_effects: level count mismatch for '" + c.name + "'");
  }

  Eigen::VectorXd eta = Eigen::VectorXd::Constant(raw.n(), model.intercept);
  for (const auto& [v, vec] : model.theta_main) {
    const Column& c = raw.columns[static_cast<std::size_t>(v)];
    if (c.kind == ColumnKind::categorical) {
      for (Eigen::Index r = 0; r < raw.n(); ++r) eta[r] += vec[c.cat_values[r] - 1];
    } else {
      eta += vec[0] * c.cont_values;
    }
  }
  for (const auto& [key, e] : model.theta_pair) {
    const Column& ci = raw.columns[static_cast<std::size_t>(e.i)];
    const Column& cj = raw.columns[static_cast<std::size_t>(e.j)];
    switch (e.kind) {
      case GroupKind::cat_cat:
        for (Eigen::Index r = 0; r < raw.n(); ++r)
          eta[r] += e.theta(ci.cat_values[r] - 1, cj.cat_values[r] - 1);
        break;
      case GroupKind::cat_cont: {
        const bool i_cat = ci.kind == ColumnKind::categorical;
        const Column& cc = i_cat ? ci : cj;
        const Column& zz = i_cat ? cj : ci;
        for (Eigen::Index r = 0; r < raw.n(); ++r)
          eta[r] += e.theta(cc.cat_values[r] - 1, 0) * zz.cont_values[r];
        break;
      }
      case GroupKind::cont_cont:
        eta += e.theta(0, 0) * ci.cont_values.cwiseProduct(cj.cont_values);
        break;
      default:
        throw ConfigError("predict_effects: bad interaction kind");
    }
  }
  return eta;
}

bool hierarchy_holds(const InteractionModel& model) {
  std::set<int> present(model.present.begin(), model.present.end());
  for (const auto& [key, e] : model.theta_pair) {
    if (e.theta.isZero(0.0)) continue;
    if (!present.count(key.first) || !present.count(key.second)) return false;
  }
  for (const auto& r : model.hierarchy)
    if (!r.parent_i_present || !r.parent_j_present) return false;
  return true;
}

}  // namespace pairlasso
