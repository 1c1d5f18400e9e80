#pragma once

#include <Eigen/Core>
#include <optional>
#include <utility>
#include <vector>

#include "pairlasso/dataset.hpp"
#include "pairlasso/types.hpp"

namespace pairlasso {

enum class GroupKind { cat_main, cont_main, cat_cat, cat_cont, cont_cont };

const char* group_kind_name(GroupKind k);
GroupKind group_kind_from_name(const std::string& s);

// One penalized coefficient block. The design columns are never materialized;
// the kernels below stream them from the Dataset. norm_scale multiplies every
// implicit column so the scaled block has unit Frobenius norm, which makes the
// uniform penalty weight gamma = 1 sensible.
struct FeatureGroup {
  GroupId id = -1;
  GroupKind kind = GroupKind::cont_main;
  int i = -1;             // first variable (only one used for mains)
  int j = -1;             // second variable, i < j for pairs
  int width = 0;
  double gamma = 1.0;
  double norm_scale = 1.0;
};

// Column-wise interaction product: every column of A times every column of B,
// elementwise over rows. Output column p*B.cols()+q is A.col(p) .* B.col(q).
Eigen::MatrixXd rowwise_product(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// out += X_g * beta (scaled by norm_scale). beta has g.width entries.
void add_group_times(const FeatureGroup& g, const Dataset& ds,
                     Eigen::Ref<const Eigen::VectorXd> beta,
                     Eigen::Ref<Eigen::VectorXd> out);

// Returns X_g * beta as a fresh n-vector.
Eigen::VectorXd group_times(const FeatureGroup& g, const Dataset& ds,
                            Eigen::Ref<const Eigen::VectorXd> beta);

// out = X_g^T * v. out has g.width entries and is overwritten.
void group_transpose_times(const FeatureGroup& g, const Dataset& ds,
                           Eigen::Ref<const Eigen::VectorXd> v,
                           Eigen::Ref<Eigen::VectorXd> out);

// || X_g^T v ||_2 using caller-owned scratch (resized as needed).
double group_score(const FeatureGroup& g, const Dataset& ds,
                   Eigen::Ref<const Eigen::VectorXd> v, Eigen::VectorXd& scratch);

// Maps between (variable, pair) identities and stable global GroupIds without
// materializing the pair list: ids [0, p) are main effects, pair (i, j) with
// i < j sits at p + i*p - i*(i+1)/2 + (j - i - 1). Lets path code stream over
// millions of candidate pairs.
class GroupIndex {
 public:
  explicit GroupIndex(const Dataset& ds);

  int p() const { return p_; }
  GroupId n_mains() const { return p_; }
  GroupId n_pairs() const { return static_cast<GroupId>(p_) * (p_ - 1) / 2; }
  GroupId total() const { return n_mains() + n_pairs(); }

  bool is_main(GroupId id) const { return id >= 0 && id < n_mains(); }
  GroupId main_id(int i) const;
  GroupId pair_id(int i, int j) const;
  std::pair<int, int> pair_vars(GroupId id) const;

  // Builds the FeatureGroup for a global id, including width and norm_scale
  // (computed from the data for blocks whose Frobenius norm depends on it).
  FeatureGroup make(const Dataset& ds, GroupId id) const;

 private:
  int p_ = 0;
  std::vector<ColumnKind> kinds_;
  std::vector<int> levels_;
};

// All p main-effect groups followed by interaction groups, ordered by id.
// With `pairs` given, only those pairs are expanded (duplicates and invalid
// indices are errors); otherwise all p*(p-1)/2 pairs are.
std::vector<FeatureGroup> enumerate_groups(
    const Dataset& ds,
    const std::optional<std::vector<std::pair<int, int>>>& pairs = std::nullopt);

}  // namespace pairlasso
