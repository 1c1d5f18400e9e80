#include "pairlasso/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <unordered_map>

namespace pairlasso {

namespace {

double log1pexp(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct Layout {
  std::vector<Eigen::Index> off;
  Eigen::Index total = 0;

  explicit Layout(std::span<const FeatureGroup> groups) {
    off.resize(groups.size() + 1);
    off[0] = 0;
    for (std::size_t k = 0; k < groups.size(); ++k) off[k + 1] = off[k] + groups[k].width;
    total = off.back();
  }
};

double loss_of_eta(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  const double n = static_cast<double>(y.size());
  if (family == Family::gaussian) return (y - eta).squaredNorm() / (2.0 * n);
  double s = 0.0;
  for (Eigen::Index r = 0; r < y.size(); ++r) s += log1pexp(eta[r]) - y[r] * eta[r];
  return s / n;
}

void dloss_deta(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& eta,
                Eigen::VectorXd& v) {
  const double n = static_cast<double>(y.size());
  if (family == Family::gaussian) {
    v = (eta - y) / n;
  } else {
    v.resize(y.size());
    for (Eigen::Index r = 0; r < y.size(); ++r) v[r] = (sigmoid(eta[r]) - y[r]) / n;
  }
}

// Workspace tying the flat coefficient vector to the group span.
class Engine {
 public:
  Engine(const Dataset& ds, std::span<const FeatureGroup> groups, Family family)
      : ds_(ds), groups_(groups), family_(family), lay_(groups) {}

  const Layout& layout() const { return lay_; }

  void eta_of(const Eigen::VectorXd& x, double mu, const std::vector<char>& act,
              Eigen::VectorXd& eta) const {
    eta.setConstant(ds_.n(), mu);
    for (std::size_t k = 0; k < groups_.size(); ++k)
      if (act[k])
        add_group_times(groups_[k], ds_, x.segment(lay_.off[k], groups_[k].width), eta);
  }

  // gradient of the loss at eta for every group plus the intercept
  void gradient(const Eigen::VectorXd& eta, Eigen::VectorXd& v, Eigen::VectorXd& g,
                double& gmu) const {
    dloss_deta(family_, ds_.y, eta, v);
    gmu = v.sum();
    for (std::size_t k = 0; k < groups_.size(); ++k)
      group_transpose_times(groups_[k], ds_, v, g.segment(lay_.off[k], groups_[k].width));
  }

  double loss(const Eigen::VectorXd& eta) const { return loss_of_eta(family_, ds_.y, eta); }

  double penalty(const Eigen::VectorXd& x, double lambda) const {
    double s = 0.0;
    for (std::size_t k = 0; k < groups_.size(); ++k)
      s += groups_[k].gamma * x.segment(lay_.off[k], groups_[k].width).norm();
    return lambda * s;
  }

  // KKT residual at a point, given dloss/deta there. Also reports the raw
  // scores s_k = ||X_k^T v||.
  double kkt(const Eigen::VectorXd& x, const Eigen::VectorXd& v, double lambda,
             std::vector<double>* scores) const {
    double worst = 0.0;
    Eigen::VectorXd scratch;
    for (std::size_t k = 0; k < groups_.size(); ++k) {
      const double s = group_score(groups_[k], ds_, v, scratch);
      if (scores) (*scores)[k] = s;
      const double rel = s / (lambda * groups_[k].gamma);
      const bool active = !x.segment(lay_.off[k], groups_[k].width).isZero(0.0);
      const double viol = active ? std::abs(rel - 1.0) : std::max(0.0, rel - 1.0);
      worst = std::max(worst, viol);
    }
    return worst;
  }

  // Crude largest-curvature estimate from a few power iterations on the
  // implicit design; only seeds the very first step size, backtracking does
  // the rest. Deterministic probe.
  double lipschitz_estimate() const {
    const Eigen::Index tot = lay_.total;
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> nd;
    Eigen::VectorXd u(tot + 1);
    for (Eigen::Index i = 0; i <= tot; ++i) u[i] = nd(rng);
    u.normalize();
    std::vector<char> all(groups_.size(), 1);
    Eigen::VectorXd w(ds_.n()), back(tot + 1);
    const double n = static_cast<double>(ds_.n());
    double lam = 0.0;
    for (int it = 0; it < 4; ++it) {
      eta_of(u.head(tot), u[tot], all, w);
      for (std::size_t k = 0; k < groups_.size(); ++k)
        group_transpose_times(groups_[k], ds_, w,
                              back.segment(lay_.off[k], groups_[k].width));
      back[tot] = w.sum();
      back /= n;
      lam = back.norm();
      if (!(lam > 0.0)) return 1.0;
      u = back / lam;
    }
    return family_ == Family::binomial ? lam / 4.0 : lam;
  }

 private:
  const Dataset& ds_;
  std::span<const FeatureGroup> groups_;
  Family family_;
  Layout lay_;
};

}  // namespace

void SolverConfig::validate() const {
  if (!(tol_kkt > 0)) throw ConfigError("tol_kkt must be positive");
  if (!(tol_objective > 0)) throw ConfigError("tol_objective must be positive");
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (!(backtrack > 0 && backtrack < 1)) throw ConfigError("backtrack must be in (0, 1)");
  if (lambda_count < 1) throw ConfigError("lambda_count must be at least 1");
  if (!(lambda_min_ratio > 0 && lambda_min_ratio <= 1))
    throw ConfigError("lambda_min_ratio must be in (0, 1]");
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

LossGradient loss_and_gradient(Family family, const Dataset& ds,
                               std::span<const FeatureGroup> groups, double intercept,
                               const std::vector<Eigen::VectorXd>& beta) {
  if (beta.size() != groups.size())
    throw ConfigError("loss_and_gradient: beta is not aligned with groups");
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(ds.n(), intercept);
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (beta[k].size() == 0) continue;
    if (beta[k].size() != groups[k].width)
      throw ConfigError("loss_and_gradient: beta block width mismatch");
    add_group_times(groups[k], ds, beta[k], eta);
  }
  LossGradient out;
  out.loss = loss_of_eta(family, ds.y, eta);
  if (std::isnan(out.loss)) throw ConvergenceError("loss is NaN", ModelFit{});
  Eigen::VectorXd v;
  dloss_deta(family, ds.y, eta, v);
  out.intercept_grad = v.sum();
  out.group_grads.resize(groups.size());
  for (std::size_t k = 0; k < groups.size(); ++k) {
    out.group_grads[k].resize(groups[k].width);
    group_transpose_times(groups[k], ds, v, out.group_grads[k]);
  }
  return out;
}

Eigen::VectorXd group_soft_threshold(const Eigen::VectorXd& v, double t) {
  const double nrm = v.norm();
  if (nrm <= t) return Eigen::VectorXd::Zero(v.size());
  return (1.0 - t / nrm) * v;
}

double null_intercept(Family family, const Eigen::VectorXd& y) {
  const double m = y.mean();
  if (family == Family::gaussian) return m;
  if (!(m > 0.0 && m < 1.0))
    throw DataError("binomial response is constant; the empty model is degenerate");
  return std::log(m / (1.0 - m));
}

Eigen::VectorXd null_loss_gradient_vector(Family family, const Eigen::VectorXd& y) {
  const double mu = null_intercept(family, y);
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(y.size(), mu);
  Eigen::VectorXd v;
  dloss_deta(family, y, eta, v);
  return v;
}

double lambda_max(const Dataset& ds, std::span<const FeatureGroup> groups, Family family) {
  if (family == Family::gaussian && (ds.y.array() - ds.y.mean()).abs().maxCoeff() == 0.0)
    return 0.0;
  const Eigen::VectorXd v = null_loss_gradient_vector(family, ds.y);
  double best = 0.0;
  Eigen::VectorXd scratch;
  for (const auto& g : groups)
    best = std::max(best, group_score(g, ds, v, scratch) / g.gamma);
  return best;
}

std::vector<double> lambda_grid(double lambda_max_value, int count, double min_ratio) {
  if (!(lambda_max_value > 0)) throw ConfigError("lambda_max must be positive to build a grid");
  if (count < 1) throw ConfigError("lambda_count must be at least 1");
  if (!(min_ratio > 0 && min_ratio <= 1)) throw ConfigError("lambda_min_ratio must be in (0, 1]");
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = lambda_max_value;
    return grid;
  }
  const double logmax = std::log(lambda_max_value);
  const double logmin = std::log(lambda_max_value * min_ratio);
  // endpoints exact by construction, interior points log-spaced
  grid.front() = lambda_max_value;
  grid.back() = lambda_max_value * min_ratio;
  for (int k = 1; k < count - 1; ++k)
    grid[static_cast<std::size_t>(k)] =
        std::exp(logmax + (logmin - logmax) * k / (count - 1));
  return grid;
}

ModelFit fit_single(const Dataset& ds, std::span<const FeatureGroup> groups, double lambda,
                    const SolverConfig& cfg, Family family, const WarmStart& warm,
                    std::vector<double>* final_scores) {
  cfg.validate();
  if (!(lambda > 0)) throw ConfigError("lambda must be positive");

  Engine eng(ds, groups, family);
  const Layout& lay = eng.layout();
  const std::size_t m = groups.size();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(lay.total);
  std::vector<char> act(m, 0);
  double mu = warm.has_intercept ? warm.intercept : null_intercept(family, ds.y);
  if (warm.coefficients && !warm.coefficients->empty()) {
    std::unordered_map<GroupId, std::size_t> pos;
    pos.reserve(m);
    for (std::size_t k = 0; k < m; ++k) pos[groups[k].id] = k;
    for (const auto& [id, beta] : *warm.coefficients) {
      auto it = pos.find(id);
      if (it == pos.end())
        throw ConfigError("warm start block " + std::to_string(id) + " is not in the group set");
      const std::size_t k = it->second;
      if (beta.size() != groups[k].width)
        throw ConfigError("warm start block " + std::to_string(id) + " has the wrong width");
      x.segment(lay.off[k], groups[k].width) = beta;
      act[k] = !beta.isZero(0.0);
    }
  }

  Eigen::VectorXd x_prev = x;
  std::vector<char> act_prev = act;
  double mu_prev = mu;

  Eigen::VectorXd w = x;                  // momentum point
  std::vector<char> act_w = act;
  double mu_w = mu;
  double rho = 1.0;

  Eigen::VectorXd eta_w(ds.n()), eta_x(ds.n()), v(ds.n());
  Eigen::VectorXd g(lay.total), g_prev(lay.total), w_store(lay.total);
  Eigen::VectorXd x_new(lay.total);
  std::vector<char> act_new(m, 0);
  double gmu = 0.0, gmu_prev = 0.0, mu_w_prev = 0.0;
  bool have_prev_grad = false;

  double step = 1.0 / std::max(eng.lipschitz_estimate(), 1e-300);

  eng.eta_of(x, mu, act, eta_x);
  double obj = eng.loss(eta_x) + eng.penalty(x, lambda);
  if (std::isnan(obj)) throw ConvergenceError("objective is NaN at the warm start", ModelFit{});

  std::vector<double> scores(m, 0.0);
  double kkt_viol = 0.0;
  bool converged = false;
  int iters = 0;
  int next_kkt_iter = 0;

  auto make_fit = [&](const Eigen::VectorXd& coef, double intercept,
                      const std::vector<char>& flags, const Eigen::VectorXd& eta,
                      double objective, double viol, int used) {
    ModelFit fit;
    fit.lambda = lambda;
    fit.intercept = intercept;
    fit.objective = objective;
    fit.kkt_max_violation = viol;
    fit.iterations = used;
    fit.fitted_linear = eta;
    for (std::size_t k = 0; k < m; ++k)
      if (flags[k]) fit.coefficients[groups[k].id] = coef.segment(lay.off[k], groups[k].width);
    return fit;
  };

  for (int it = 0; it < cfg.max_iter && !converged; ++it) {
    iters = it + 1;
    eng.eta_of(w, mu_w, act_w, eta_w);
    const double loss_w = eng.loss(eta_w);
    if (std::isnan(loss_w))
      throw ConvergenceError("loss is NaN at the momentum point",
                             make_fit(x, mu, act, eta_x, obj, kkt_viol, iters));
    eng.gradient(eta_w, v, g, gmu);

    // secant estimate from successive momentum points seeds the line search
    if (have_prev_grad) {
      const double dg2 = (g - g_prev).squaredNorm() + (gmu - gmu_prev) * (gmu - gmu_prev);
      if (dg2 > 0) {
        const double dw2 = (w - w_store).squaredNorm() + (mu_w - mu_w_prev) * (mu_w - mu_w_prev);
        if (dw2 > 0) step = std::sqrt(dw2 / dg2);
      }
    }
    g_prev = g;
    gmu_prev = gmu;
    w_store = w;
    mu_w_prev = mu_w;
    have_prev_grad = true;

    // backtracking line search against the quadratic majorization
    double mu_new = 0.0, loss_x = 0.0;
    while (true) {
      if (step < 1e-18)
        throw ConvergenceError("step size underflow",
                               make_fit(x, mu, act, eta_x, obj, kkt_viol, iters));
      mu_new = mu_w - step * gmu;
      for (std::size_t k = 0; k < m; ++k) {
        auto seg = x_new.segment(lay.off[k], groups[k].width);
        auto gseg = g.segment(lay.off[k], groups[k].width);
        const double t = step * lambda * groups[k].gamma;
        double nrm, thr;
        if (act_w[k]) {
          seg = w.segment(lay.off[k], groups[k].width) - step * gseg;
          nrm = seg.norm();
          thr = t;
        } else {
          // Zero momentum block: decide from step * ||g_k|| so the comparison
          // is monotone in the score (keeps lambda >= lambda_max exactly
          // empty), with a few-ulp margin against intercept rounding drift.
          // A score within 1e-15 of the boundary stays zero and shows up as a
          // KKT residual of at most 1e-15, far below any working tolerance.
          nrm = step * gseg.norm();
          thr = t * (1.0 + 1e-15);
          if (nrm > thr) seg = -step * gseg;
        }
        if (nrm <= thr) {
          seg.setZero();
          act_new[k] = 0;
        } else {
          seg *= (1.0 - t / nrm);
          act_new[k] = 1;
        }
      }
      eng.eta_of(x_new, mu_new, act_new, eta_x);
      loss_x = eng.loss(eta_x);
      const double dmu = mu_new - mu_w;
      const double dist2 = (x_new - w).squaredNorm() + dmu * dmu;
      const double q = loss_w + g.dot(x_new - w) + gmu * dmu + dist2 / (2.0 * step);
      if (std::isfinite(loss_x) && loss_x <= q + 1e-12 * std::max(1.0, std::abs(loss_w))) break;
      step *= cfg.backtrack;
    }

    // gradient-based adaptive restart
    const double cross = (w - x_new).dot(x_new - x) + (mu_w - mu_new) * (mu_new - mu);
    if (cross > 0) rho = 1.0;
    const double rho_next = (1.0 + std::sqrt(1.0 + 4.0 * rho * rho)) / 2.0;
    const double mom = (rho - 1.0) / rho_next;

    x_prev = x;
    mu_prev = mu;
    act_prev = act;
    x = x_new;
    mu = mu_new;
    act = act_new;

    w = x + mom * (x - x_prev);
    mu_w = mu + mom * (mu - mu_prev);
    for (std::size_t k = 0; k < m; ++k) act_w[k] = act[k] | act_prev[k];
    rho = rho_next;

    const double obj_new = loss_x + eng.penalty(x, lambda);
    const bool stalled = std::abs(obj_new - obj) <= cfg.tol_objective * std::max(1.0, std::abs(obj_new));
    obj = obj_new;

    if ((stalled && it >= next_kkt_iter) || it % 50 == 49 || it == cfg.max_iter - 1) {
      dloss_deta(family, ds.y, eta_x, v);
      kkt_viol = eng.kkt(x, v, lambda, &scores);
      if (kkt_viol <= cfg.tol_kkt)
        converged = true;
      else
        next_kkt_iter = it + 10;
    }
  }

  if (!converged) {
    dloss_deta(family, ds.y, eta_x, v);
    kkt_viol = eng.kkt(x, v, lambda, &scores);
    converged = kkt_viol <= cfg.tol_kkt;
  }
  if (final_scores) *final_scores = scores;
  ModelFit fit = make_fit(x, mu, act, eta_x, obj, kkt_viol, iters);
  if (!converged) {
    std::ostringstream msg;
    msg << "no convergence after " << cfg.max_iter << " iterations (kkt residual "
        << kkt_viol << ", tolerance " << cfg.tol_kkt << ")";
    throw ConvergenceError(msg.str(), std::move(fit));
  }
  return fit;
}

Eigen::VectorXd predict_linear(const ModelFit& fit, std::span<const FeatureGroup> groups,
                               const Dataset& ds) {
  std::unordered_map<GroupId, const FeatureGroup*> by_id;
  by_id.reserve(groups.size());
  for (const auto& g : groups) by_id[g.id] = &g;
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(ds.n(), fit.intercept);
  for (const auto& [id, beta] : fit.coefficients) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw DataError("model block " + std::to_string(id) + " has no matching group");
    if (beta.size() != it->second->width)
      throw DataError("model block " + std::to_string(id) + " width mismatch");
    add_group_times(*it->second, ds, beta, eta);
  }
  return eta;
}

Eigen::VectorXd predict_response(const ModelFit& fit, std::span<const FeatureGroup> groups,
                                 const Dataset& ds, Family family) {
  Eigen::VectorXd eta = predict_linear(fit, groups, ds);
  if (family == Family::gaussian) return eta;
  for (Eigen::Index r = 0; r < eta.size(); ++r) eta[r] = sigmoid(eta[r]);
  return eta;
}

}  // namespace pairlasso
