#include <doctest.h>

#include <pairlasso/dataset.hpp>
#include <pairlasso/groups.hpp>
#include <pairlasso/hierarchy.hpp>
#include <pairlasso/path.hpp>
#include <pairlasso/solver.hpp>

#include "oracles.hpp"

#include <algorithm>
#include <random>

using namespace pairlasso;

namespace {

Eigen::VectorXd random_block(std::uint64_t seed, int width) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd b(width);
  for (int k = 0; k < width; ++k) b[k] = oracle::std_normal(rng);
  return b;
}

void check_zero_sums(const EffectDecomposition& d, double tol = 1e-12) {
  if (d.alpha1.size() > 1) CHECK(std::abs(d.alpha1.sum()) < tol);
  if (d.alpha2.size() > 1) CHECK(std::abs(d.alpha2.sum()) < tol);
  if (d.kind == GroupKind::cat_cat) {
    for (int r = 0; r < d.alpha12.rows(); ++r) CHECK(std::abs(d.alpha12.row(r).sum()) < tol);
    for (int c = 0; c < d.alpha12.cols(); ++c) CHECK(std::abs(d.alpha12.col(c).sum()) < tol);
  } else if (d.kind == GroupKind::cat_cont) {
    CHECK(std::abs(d.alpha12.col(0).sum()) < tol);
  }
}

}  // namespace

TEST_CASE("cat_cat decomposition on a worked 2x2 example") {
  // beta in row-major order encodes the table [[5, 1], [3, 3]]:
  // grand mean 3, row means (3, 3), column means (4, 2)
  Eigen::VectorXd beta(4);
  beta << 5.0, 1.0, 3.0, 3.0;
  EffectDecomposition d = decompose_cat_cat(beta, 2, 2);
  CHECK(d.mu_tilde == doctest::Approx(3.0));
  CHECK(d.alpha1[0] == doctest::Approx(0.0));
  CHECK(d.alpha1[1] == doctest::Approx(0.0));
  CHECK(d.alpha2[0] == doctest::Approx(1.0));
  CHECK(d.alpha2[1] == doctest::Approx(-1.0));
  CHECK(d.alpha12(0, 0) == doctest::Approx(1.0));
  CHECK(d.alpha12(0, 1) == doctest::Approx(-1.0));
  CHECK(d.alpha12(1, 0) == doctest::Approx(-1.0));
  CHECK(d.alpha12(1, 1) == doctest::Approx(1.0));
  CHECK((recompose(d) - beta).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("decompositions round trip and satisfy their constraints") {
  SUBCASE("cat_cat") {
    for (auto [L1, L2] : {std::pair{2, 3}, std::pair{4, 2}, std::pair{5, 5}}) {
      Eigen::VectorXd beta = random_block(100 + L1 * 10 + L2, L1 * L2);
      EffectDecomposition d = decompose_cat_cat(beta, L1, L2);
      CHECK((recompose(d) - beta).lpNorm<Eigen::Infinity>() < 1e-13);
      check_zero_sums(d);
      // squared norms add up with cell-count weights
      const double parts = L1 * L2 * d.mu_tilde * d.mu_tilde +
                           L2 * d.alpha1.squaredNorm() + L1 * d.alpha2.squaredNorm() +
                           d.alpha12.squaredNorm();
      CHECK(beta.squaredNorm() == doctest::Approx(parts).epsilon(1e-12));
    }
  }

  SUBCASE("cat_cont") {
    const int L = 4;
    Eigen::VectorXd beta = random_block(200, 2 * L);
    EffectDecomposition d = decompose_cat_cont(beta, L);
    CHECK(d.L1 == L);
    CHECK((recompose(d) - beta).lpNorm<Eigen::Infinity>() < 1e-13);
    check_zero_sums(d);
    // offsets split as L*mu^2 + ||a1||^2, slopes as L*a2^2 + ||a12||^2
    const double parts = L * d.mu_tilde * d.mu_tilde + d.alpha1.squaredNorm() +
                         L * d.alpha2.squaredNorm() + d.alpha12.squaredNorm();
    CHECK(beta.squaredNorm() == doctest::Approx(parts).epsilon(1e-12));
    // mu is the mean offset, alpha2 the mean slope
    CHECK(d.mu_tilde == doctest::Approx(beta.head(L).mean()));
    CHECK(d.alpha2[0] == doctest::Approx(beta.tail(L).mean()));
  }

  SUBCASE("cont_cont is the identity split") {
    Eigen::VectorXd beta = random_block(300, 4);
    EffectDecomposition d = decompose_cont_cont(beta);
    CHECK(d.mu_tilde == beta[0]);
    CHECK(d.alpha1[0] == beta[1]);
    CHECK(d.alpha2[0] == beta[2]);
    CHECK(d.alpha12(0, 0) == beta[3]);
    CHECK((recompose(d) - beta).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("schema_of mirrors the dataset columns") {
  Dataset ds = oracle::random_dataset(5, 20, 2, 1, 3, Family::gaussian);
  Schema s = schema_of(ds);
  REQUIRE(s.columns.size() == static_cast<std::size_t>(ds.p()));
  for (int c = 0; c < ds.p(); ++c) {
    CHECK(s.columns[static_cast<std::size_t>(c)].name == ds.columns[static_cast<std::size_t>(c)].name);
    CHECK(s.columns[static_cast<std::size_t>(c)].kind == ds.columns[static_cast<std::size_t>(c)].kind);
  }
}

TEST_CASE("extract_model reproduces the linear predictor in raw units") {
  for (Family family : {Family::gaussian, Family::binomial}) {
    CAPTURE(family_name(family));
    Dataset raw = oracle::random_dataset(61, 80, 2, 2, 3, family);
    auto [ds, st] = standardize(raw);
    Schema schema = schema_of(raw);

    PathOptions opt;
    opt.solver.lambda_count = 10;
    opt.solver.lambda_min_ratio = 0.05;
    opt.solver.tol_kkt = 1e-7;
    opt.solver.max_iter = 200000;  // the binomial end of the grid converges slowly
    PathResult r = fit_path(ds, opt);
    auto groups = enumerate_groups(ds);

    bool saw_pair = false;
    for (const auto& fit : r.fits) {
      InteractionModel m = extract_model(fit, groups, st, schema, family);
      CHECK(m.family == family);
      CHECK(hierarchy_holds(m));

      Eigen::VectorXd eta = predict_effects(m, raw);
      CHECK((eta - fit.fitted_linear).lpNorm<Eigen::Infinity>() < 1e-9);

      // categorical mains centered, interaction tables centered per kind
      for (const auto& [v, theta] : m.theta_main)
        if (m.kinds[static_cast<std::size_t>(v)] == ColumnKind::categorical)
          CHECK(std::abs(theta.sum()) < 1e-10);
      for (const auto& [key, eff] : m.theta_pair) {
        saw_pair = true;
        if (eff.kind == GroupKind::cat_cat) {
          for (int r2 = 0; r2 < eff.theta.rows(); ++r2)
            CHECK(std::abs(eff.theta.row(r2).sum()) < 1e-10);
          for (int c = 0; c < eff.theta.cols(); ++c)
            CHECK(std::abs(eff.theta.col(c).sum()) < 1e-10);
        } else if (eff.kind == GroupKind::cat_cont) {
          CHECK(std::abs(eff.theta.col(0).sum()) < 1e-10);
        }
        // parents of every reported pair are in the presence set
        CHECK(std::binary_search(m.present.begin(), m.present.end(), key.first));
        CHECK(std::binary_search(m.present.begin(), m.present.end(), key.second));
      }
      for (const auto& rep : m.hierarchy) {
        CHECK(rep.parent_i_present);
        CHECK(rep.parent_j_present);
      }
    }
    CHECK(saw_pair);  // the path went deep enough to exercise interactions
  }
}

TEST_CASE("a pure interaction block reports both parents") {
  // hand-built fit: one cat_cat block, no mains
  Dataset raw = oracle::random_dataset(71, 40, 2, 0, 3, Family::gaussian);
  auto [ds, st] = standardize(raw);
  auto groups = enumerate_groups(ds);
  GroupIndex index(ds);
  const GroupId pid = index.pair_id(0, 1);

  ModelFit fit;
  fit.lambda = 0.1;
  fit.intercept = 0.25;
  fit.coefficients[pid] = random_block(7, 9);
  fit.fitted_linear = predict_linear(fit, groups, ds);

  InteractionModel m = extract_model(fit, groups, st, schema_of(raw), Family::gaussian);
  CHECK(m.present == std::vector<int>{0, 1});
  REQUIRE(m.theta_pair.count({0, 1}) == 1);
  CHECK(hierarchy_holds(m));
  // the ANOVA split pushes main-effect content into theta_main
  CHECK(m.theta_main.count(0) == 1);
  CHECK(m.theta_main.count(1) == 1);

  Eigen::VectorXd eta = predict_effects(m, raw);
  CHECK((eta - fit.fitted_linear).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("an empty fit extracts to an intercept-only model") {
  Dataset raw = oracle::random_dataset(73, 30, 1, 1, 3, Family::gaussian);
  auto [ds, st] = standardize(raw);
  auto groups = enumerate_groups(ds);
  ModelFit fit;
  fit.intercept = 1.5;
  fit.fitted_linear = Eigen::VectorXd::Constant(ds.n(), 1.5);

  InteractionModel m = extract_model(fit, groups, st, schema_of(raw), Family::gaussian);
  CHECK(m.intercept == doctest::Approx(1.5));
  CHECK(m.theta_main.empty());
  CHECK(m.theta_pair.empty());
  CHECK(m.present.empty());
  CHECK(hierarchy_holds(m));
  CHECK((predict_effects(m, raw).array() == 1.5).all());
}

TEST_CASE("predict_effects validates the input frame") {
  Dataset raw = oracle::random_dataset(79, 30, 1, 1, 3, Family::gaussian);
  auto [ds, st] = standardize(raw);
  auto groups = enumerate_groups(ds);
  ModelFit fit;
  fit.intercept = 0.5;
  fit.coefficients[0] = random_block(3, groups[0].width);
  InteractionModel m = extract_model(fit, groups, st, schema_of(raw), Family::gaussian);

  Dataset renamed = raw;
  renamed.columns[0].name = "zzz";
  CHECK_THROWS_AS(predict_effects(m, renamed), DataError);

  Dataset rekinded = raw;
  std::swap(rekinded.columns[0], rekinded.columns[1]);
  CHECK_THROWS_AS(predict_effects(m, rekinded), DataError);
}
