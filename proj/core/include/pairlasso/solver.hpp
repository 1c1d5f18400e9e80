#pragma once

#include <Eigen/Core>
#include <map>
#include <span>
#include <vector>

#include "pairlasso/dataset.hpp"
#include "pairlasso/groups.hpp"
#include "pairlasso/types.hpp"

namespace pairlasso {

struct SolverConfig {
  double tol_kkt = 1e-4;          // max relative KKT residual accepted at exit
  double tol_objective = 1e-8;    // relative objective stall that triggers a KKT check
  int max_iter = 5000;            // proximal-gradient iterations per lambda
  double backtrack = 0.8;         // step shrink factor when majorization fails
  int lambda_count = 50;          // path grid size
  double lambda_min_ratio = 0.01; // last grid point as a fraction of lambda_max
  int threads = 0;                // 0 = PAIRLASSO_THREADS or hardware count

  void validate() const;
};

struct GroupCoefficients {
  GroupId id = -1;
  Eigen::VectorXd beta;
};

// One converged solution. Coefficients live in the scaled basis (they multiply
// the unit-Frobenius-norm implicit columns); only blocks with a nonzero entry
// are stored. fitted_linear is the training-data linear predictor.
struct ModelFit {
  double lambda = 0.0;
  double intercept = 0.0;
  std::map<GroupId, Eigen::VectorXd> coefficients;
  double objective = 0.0;
  double kkt_max_violation = 0.0;
  int iterations = 0;
  Eigen::VectorXd fitted_linear;

  bool active(GroupId id) const { return coefficients.count(id) != 0; }
};

// The iteration budget ran out while the KKT residual was still above
// tolerance. Carries the best state reached.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, ModelFit partial_fit)
      : std::runtime_error(what), partial(std::move(partial_fit)) {}
  ModelFit partial;
};

struct LossGradient {
  double loss = 0.0;
  double intercept_grad = 0.0;
  std::vector<Eigen::VectorXd> group_grads;  // aligned with the groups span
};

// Negative log-likelihood scaled by 1/n and its gradient at the given state.
// beta is aligned with groups; an empty entry means a zero block.
LossGradient loss_and_gradient(Family family, const Dataset& ds,
                               std::span<const FeatureGroup> groups, double intercept,
                               const std::vector<Eigen::VectorXd>& beta);

// argmin_b ||v - b||^2/2 + t*||b||_2  =  (1 - t/||v||)_+ v
Eigen::VectorXd group_soft_threshold(const Eigen::VectorXd& v, double t);

// Intercept of the empty model (mean for gaussian, logit of the mean for
// binomial). Binomial requires a non-degenerate response.
double null_intercept(Family family, const Eigen::VectorXd& y);

// d(loss)/d(eta) at the empty model; score of group g against this vector,
// divided by gamma_g, is the smallest lambda at which g stays inactive.
Eigen::VectorXd null_loss_gradient_vector(Family family, const Eigen::VectorXd& y);

// Smallest lambda whose optimal model is empty: max_g ||X_g^T v0|| / gamma_g.
double lambda_max(const Dataset& ds, std::span<const FeatureGroup> groups, Family family);

// Log-spaced grid from lambda_max down to min_ratio * lambda_max, inclusive.
std::vector<double> lambda_grid(double lambda_max_value, int count, double min_ratio);

struct WarmStart {
  bool has_intercept = false;
  double intercept = 0.0;
  const std::map<GroupId, Eigen::VectorXd>* coefficients = nullptr;
};

// Solves one penalized problem with accelerated proximal gradient descent:
// gradient steps at the momentum point, per-group soft-thresholding, gradient
// based adaptive restart, and backtracking line search seeded with a secant
// step estimate. Success is decided by the KKT residual alone; max_iter with
// residual above tol throws ConvergenceError. With final_scores given, the
// per-group scores ||X_g^T dL/deta|| from the exit KKT check are written out.
ModelFit fit_single(const Dataset& ds, std::span<const FeatureGroup> groups, double lambda,
                    const SolverConfig& cfg, Family family, const WarmStart& warm = {},
                    std::vector<double>* final_scores = nullptr);

// Linear predictor intercept + sum of group contributions on new data. Every
// active block must have a matching group (by id) with the right width.
Eigen::VectorXd predict_linear(const ModelFit& fit, std::span<const FeatureGroup> groups,
                               const Dataset& ds);

// Response-scale prediction: identity for gaussian, logistic for binomial.
Eigen::VectorXd predict_response(const ModelFit& fit, std::span<const FeatureGroup> groups,
                                 const Dataset& ds, Family family);

}  // namespace pairlasso
