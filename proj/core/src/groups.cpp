#include "pairlasso/groups.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pairlasso {

const char* group_kind_name(GroupKind k) {
  switch (k) {
    case GroupKind::cat_main: return "cat_main";
    case GroupKind::cont_main: return "cont_main";
    case GroupKind::cat_cat: return "cat_cat";
    case GroupKind::cat_cont: return "cat_cont";
    case GroupKind::cont_cont: return "cont_cont";
  }
  return "?";
}

GroupKind group_kind_from_name(const std::string& s) {
  if (s == "cat_main") return GroupKind::cat_main;
  if (s == "cont_main") return GroupKind::cont_main;
  if (s == "cat_cat") return GroupKind::cat_cat;
  if (s == "cat_cont") return GroupKind::cat_cont;
  if (s == "cont_cont") return GroupKind::cont_cont;
  throw ConfigError("unknown group kind '" + s + "'");
}

Eigen::MatrixXd rowwise_product(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.rows() != B.rows()) throw ConfigError("rowwise_product: row counts differ");
  Eigen::MatrixXd out(A.rows(), A.cols() * B.cols());
  for (Eigen::Index p = 0; p < A.cols(); ++p)
    for (Eigen::Index q = 0; q < B.cols(); ++q)
      out.col(p * B.cols() + q) = A.col(p).cwiseProduct(B.col(q));
  return out;
}

namespace {

// Roles of a mixed pair: the indicator block always belongs to the
// categorical variable, whichever index it has.
struct MixedPair {
  const std::vector<std::int32_t>* levels;
  const Eigen::VectorXd* z;
  int L;
};

MixedPair mixed_pair(const FeatureGroup& g, const Dataset& ds) {
  const Column& a = ds.columns[static_cast<std::size_t>(g.i)];
  const Column& b = ds.columns[static_cast<std::size_t>(g.j)];
  if (a.kind == ColumnKind::categorical)
    return {&a.cat_values, &b.cont_values, a.levels};
  return {&b.cat_values, &a.cont_values, b.levels};
}

}  // namespace

void add_group_times(const FeatureGroup& g, const Dataset& ds,
                     Eigen::Ref<const Eigen::VectorXd> beta,
                     Eigen::Ref<Eigen::VectorXd> out) {
  const Eigen::Index n = ds.n();
  const double ns = g.norm_scale;
  switch (g.kind) {
    case GroupKind::cat_main: {
      const auto& lv = ds.columns[static_cast<std::size_t>(g.i)].cat_values;
      for (Eigen::Index r = 0; r < n; ++r) out[r] += ns * beta[lv[r] - 1];
      break;
    }
    case GroupKind::cont_main: {
      out += (ns * beta[0]) * ds.columns[static_cast<std::size_t>(g.i)].cont_values;
      break;
    }
    case GroupKind::cat_cat: {
      const auto& li = ds.columns[static_cast<std::size_t>(g.i)].cat_values;
      const auto& lj = ds.columns[static_cast<std::size_t>(g.j)].cat_values;
      const int L2 = ds.columns[static_cast<std::size_t>(g.j)].levels;
      for (Eigen::Index r = 0; r < n; ++r)
        out[r] += ns * beta[(li[r] - 1) * L2 + (lj[r] - 1)];
      break;
    }
    case GroupKind::cat_cont: {
      const MixedPair mp = mixed_pair(g, ds);
      const auto& lv = *mp.levels;
      const auto& z = *mp.z;
      const int L = mp.L;
      for (Eigen::Index r = 0; r < n; ++r) {
        const int l = lv[r] - 1;
        out[r] += ns * (beta[l] + beta[L + l] * z[r]);
      }
      break;
    }
    case GroupKind::cont_cont: {
      const auto& zi = ds.columns[static_cast<std::size_t>(g.i)].cont_values;
      const auto& zj = ds.columns[static_cast<std::size_t>(g.j)].cont_values;
      for (Eigen::Index r = 0; r < n; ++r)
        out[r] += ns * (beta[0] + beta[1] * zi[r] + beta[2] * zj[r] + beta[3] * zi[r] * zj[r]);
      break;
    }
  }
}

Eigen::VectorXd group_times(const FeatureGroup& g, const Dataset& ds,
                            Eigen::Ref<const Eigen::VectorXd> beta) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ds.n());
  add_group_times(g, ds, beta, out);
  return out;
}

void group_transpose_times(const FeatureGroup& g, const Dataset& ds,
                           Eigen::Ref<const Eigen::VectorXd> v,
                           Eigen::Ref<Eigen::VectorXd> out) {
  const Eigen::Index n = ds.n();
  const double ns = g.norm_scale;
  out.setZero();
  switch (g.kind) {
    case GroupKind::cat_main: {
      const auto& lv = ds.columns[static_cast<std::size_t>(g.i)].cat_values;
      for (Eigen::Index r = 0; r < n; ++r) out[lv[r] - 1] += v[r];
      out *= ns;
      break;
    }
    case GroupKind::cont_main: {
      out[0] = ns * ds.columns[static_cast<std::size_t>(g.i)].cont_values.dot(v);
      break;
    }
    case GroupKind::cat_cat: {
      const auto& li = ds.columns[static_cast<std::size_t>(g.i)].cat_values;
      const auto& lj = ds.columns[static_cast<std::size_t>(g.j)].cat_values;
      const int L2 = ds.columns[static_cast<std::size_t>(g.j)].levels;
      for (Eigen::Index r = 0; r < n; ++r)
        out[(li[r] - 1) * L2 + (lj[r] - 1)] += v[r];
      out *= ns;
      break;
    }
    case GroupKind::cat_cont: {
      const MixedPair mp = mixed_pair(g, ds);
      const auto& lv = *mp.levels;
      const auto& z = *mp.z;
      const int L = mp.L;
      for (Eigen::Index r = 0; r < n; ++r) {
        const int l = lv[r] - 1;
        out[l] += v[r];
        out[L + l] += v[r] * z[r];
      }
      out *= ns;
      break;
    }
    case GroupKind::cont_cont: {
      const auto& zi = ds.columns[static_cast<std::size_t>(g.i)].cont_values;
      const auto& zj = ds.columns[static_cast<std::size_t>(g.j)].cont_values;
      double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
      for (Eigen::Index r = 0; r < n; ++r) {
        s0 += v[r];
        s1 += v[r] * zi[r];
        s2 += v[r] * zj[r];
        s3 += v[r] * zi[r] * zj[r];
      }
      out[0] = ns * s0;
      out[1] = ns * s1;
      out[2] = ns * s2;
      out[3] = ns * s3;
      break;
    }
  }
}

double group_score(const FeatureGroup& g, const Dataset& ds,
                   Eigen::Ref<const Eigen::VectorXd> v, Eigen::VectorXd& scratch) {
  if (scratch.size() < g.width) scratch.resize(g.width);
  auto head = scratch.head(g.width);
  group_transpose_times(g, ds, v, head);
  return head.norm();
}

GroupIndex::GroupIndex(const Dataset& ds) : p_(ds.p()) {
  if (p_ < 1) throw DataError("dataset has no feature columns");
  kinds_.reserve(static_cast<std::size_t>(p_));
  levels_.reserve(static_cast<std::size_t>(p_));
  for (const auto& col : ds.columns) {
    kinds_.push_back(col.kind);
    levels_.push_back(col.levels);
  }
}

GroupId GroupIndex::main_id(int i) const {
  if (i < 0 || i >= p_) throw ConfigError("variable index out of range");
  return i;
}

GroupId GroupIndex::pair_id(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= p_ || i == j) throw ConfigError("invalid pair indices");
  const GroupId P = p_;
  return P + static_cast<GroupId>(i) * P - static_cast<GroupId>(i) * (i + 1) / 2 + (j - i - 1);
}

std::pair<int, int> GroupIndex::pair_vars(GroupId id) const {
  if (id < n_mains() || id >= total()) throw ConfigError("id is not a pair group");
  GroupId r = id - n_mains();
  int i = 0;
  // row i of the strictly upper triangle holds p-1-i pairs
  while (r >= p_ - 1 - i) {
    r -= p_ - 1 - i;
    ++i;
  }
  return {i, i + 1 + static_cast<int>(r)};
}

FeatureGroup GroupIndex::make(const Dataset& ds, GroupId id) const {
  FeatureGroup g;
  g.id = id;
  const double n = static_cast<double>(ds.n());
  if (is_main(id)) {
    g.i = static_cast<int>(id);
    if (kinds_[static_cast<std::size_t>(g.i)] == ColumnKind::categorical) {
      g.kind = GroupKind::cat_main;
      g.width = levels_[static_cast<std::size_t>(g.i)];
      g.norm_scale = 1.0 / std::sqrt(n);  // one indicator per row
    } else {
      g.kind = GroupKind::cont_main;
      g.width = 1;
      const double f = ds.columns[static_cast<std::size_t>(g.i)].cont_values.norm();
      if (!(f > 0.0)) throw DataError("constant continuous column in group construction");
      g.norm_scale = 1.0 / f;
    }
    return g;
  }
  auto [i, j] = pair_vars(id);
  g.i = i;
  g.j = j;
  const bool ci = kinds_[static_cast<std::size_t>(i)] == ColumnKind::categorical;
  const bool cj = kinds_[static_cast<std::size_t>(j)] == ColumnKind::categorical;
  if (ci && cj) {
    g.kind = GroupKind::cat_cat;
    g.width = levels_[static_cast<std::size_t>(i)] * levels_[static_cast<std::size_t>(j)];
    g.norm_scale = 1.0 / std::sqrt(n);  // one joint indicator per row
  } else if (!ci && !cj) {
    g.kind = GroupKind::cont_cont;
    g.width = 4;
    const auto& zi = ds.columns[static_cast<std::size_t>(i)].cont_values;
    const auto& zj = ds.columns[static_cast<std::size_t>(j)].cont_values;
    const double f2 = n + zi.squaredNorm() + zj.squaredNorm() +
                      zi.cwiseProduct(zj).squaredNorm();
    g.norm_scale = 1.0 / std::sqrt(f2);
  } else {
    g.kind = GroupKind::cat_cont;
    const int L = ci ? levels_[static_cast<std::size_t>(i)] : levels_[static_cast<std::size_t>(j)];
    const auto& z = ci ? ds.columns[static_cast<std::size_t>(j)].cont_values
                       : ds.columns[static_cast<std::size_t>(i)].cont_values;
    g.width = 2 * L;
    g.norm_scale = 1.0 / std::sqrt(n + z.squaredNorm());
  }
  return g;
}

std::vector<FeatureGroup> enumerate_groups(
    const Dataset& ds, const std::optional<std::vector<std::pair<int, int>>>& pairs) {
  const GroupIndex index(ds);
  std::vector<FeatureGroup> out;
  for (int i = 0; i < index.p(); ++i) out.push_back(index.make(ds, index.main_id(i)));
  if (pairs) {
    std::set<GroupId> ids;
    for (auto [i, j] : *pairs) {
      const GroupId id = index.pair_id(i, j);
      if (!ids.insert(id).second)
        throw ConfigError("duplicate pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    }
    for (GroupId id : ids) out.push_back(index.make(ds, id));
  } else {
    out.reserve(static_cast<std::size_t>(index.total()));
    for (GroupId id = index.n_mains(); id < index.total(); ++id)
      out.push_back(index.make(ds, id));
  }
  return out;
}

}  // namespace pairlasso
