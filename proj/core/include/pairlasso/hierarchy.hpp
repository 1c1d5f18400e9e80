#pragma once

#include <Eigen/Core>
#include <map>
#include <span>
#include <vector>

#include "pairlasso/dataset.hpp"
#include "pairlasso/groups.hpp"
#include "pairlasso/solver.hpp"

namespace pairlasso {

// Orthogonal split of an interaction block into grand mean, per-variable
// main-effect adjustments and a pure interaction core. The pieces satisfy
// beta = recompose(...) exactly and the squared norms add up with the usual
// cell-count weights.
struct EffectDecomposition {
  GroupKind kind = GroupKind::cat_cat;
  int L1 = 0;                 // levels of the first slot (cat var), 1 if continuous
  int L2 = 0;
  double mu_tilde = 0.0;
  Eigen::VectorXd alpha1;     // adjustment for the first slot
  Eigen::VectorXd alpha2;     // adjustment for the second slot
  Eigen::MatrixXd alpha12;    // interaction core (cat_cat: L1 x L2; cat_cont: L x 1; cont_cont: 1 x 1)
};

// beta is the L1*L2 block in row-major (level_i, level_j) order.
EffectDecomposition decompose_cat_cat(const Eigen::VectorXd& beta, int L1, int L2);

// beta is [level offsets (L) | per-level slopes (L)]; slot 1 is the
// categorical variable, slot 2 the continuous one.
EffectDecomposition decompose_cat_cont(const Eigen::VectorXd& beta, int L);

// beta is [constant, z1, z2, z1*z2] coefficients.
EffectDecomposition decompose_cont_cont(const Eigen::VectorXd& beta);

// Inverse of the decompositions (exact); used to check round trips.
Eigen::VectorXd recompose(const EffectDecomposition& d);

struct InteractionEffect {
  int i = -1;
  int j = -1;
  GroupKind kind = GroupKind::cat_cat;
  // cat_cat: L_i x L_j table on raw level pairs; cat_cont: L x 1 per-level
  // coefficients multiplying the raw continuous value; cont_cont: 1 x 1 on
  // the raw product x_i * x_j.
  Eigen::MatrixXd theta;
};

struct PairReport {
  int i = -1;
  int j = -1;
  bool parent_i_present = false;
  bool parent_j_present = false;
};

// Fitted effects on raw (unstandardized) inputs. Categorical main-effect
// vectors sum to zero; interaction tables are doubly centered (cat_cat) or
// zero-sum over levels (cat_cont). Every variable that parents a reported
// interaction is in `present`, which is what makes the model obey strong
// hierarchy structurally.
struct InteractionModel {
  Family family = Family::gaussian;
  double intercept = 0.0;
  std::vector<std::string> names;
  std::vector<ColumnKind> kinds;
  std::vector<int> levels;
  std::map<int, Eigen::VectorXd> theta_main;  // cat: length L; cont: length 1
  std::map<std::pair<int, int>, InteractionEffect> theta_pair;
  std::vector<int> present;                    // sorted variable indices
  std::vector<PairReport> hierarchy;
};

Schema schema_of(const Dataset& ds);

// Folds norm scales back in, splits every interaction block, pushes the
// main-effect adjustments into theta, centers categorical mains into the
// intercept and rewrites everything in raw input units using the recorded
// standardization. The returned model reproduces the fit's linear predictor
// on raw data exactly.
InteractionModel extract_model(const ModelFit& fit, std::span<const FeatureGroup> groups,
                               const Standardization& st, const Schema& schema,
                               Family family = Family::gaussian);

// Linear predictor of the effect-form model on raw inputs.
Eigen::VectorXd predict_effects(const InteractionModel& model, const Dataset& raw);

// True when every reported interaction has both parents in `present`.
bool hierarchy_holds(const InteractionModel& model);

}  // namespace pairlasso
