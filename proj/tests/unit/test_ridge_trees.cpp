#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "fcpred/ml/forest.hpp"
#include "fcpred/ml/gboost.hpp"
#include "fcpred/ml/ridge.hpp"
#include "fcpred/ml/standardizer.hpp"
#include "fcpred/ml/tree.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace fcpred::ml {
namespace {

using fcpred::testing::random_matrix;
using fcpred::testing::random_vector;

class RidgeSolvers : public ::testing::TestWithParam<RidgeSolver> {};

TEST_P(RidgeSolvers, MatchNormalEquations) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::MatrixXd X = random_matrix(30, 6, seed);
    const Eigen::VectorXd y = random_vector(30, seed + 50);
    for (double alpha : {1e-3, 1.0, 50.0}) {
      for (bool intercept : {true, false}) {
        RidgeParams p;
        p.alpha = alpha;
        p.fit_intercept = intercept;
        p.solver = GetParam();
        p.tol = 1e-12;
        const RidgeModel m = fit_ridge(X, y, p);
        const Eigen::VectorXd ref = fcpred::testing::normal_equations(X, y, intercept, alpha);
        const double tol = GetParam() == RidgeSolver::kSag ? 1e-6 : 1e-9;
        EXPECT_LT((m.weights - ref.tail(6)).cwiseAbs().maxCoeff(), tol)
            << "alpha " << alpha << " intercept " << intercept;
        EXPECT_NEAR(m.intercept, intercept ? ref(0) : 0.0, tol);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(All, RidgeSolvers,
                         ::testing::Values(RidgeSolver::kSvd, RidgeSolver::kCholesky,
                                           RidgeSolver::kLsqr, RidgeSolver::kSag),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Ridge, ShrinksTowardZeroAsAlphaGrows) {
  const Eigen::MatrixXd X = random_matrix(40, 5, 1);
  const Eigen::VectorXd y = X * Eigen::VectorXd::LinSpaced(5, 1, 5) + random_vector(40, 2);
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {0.0, 0.1, 1.0, 10.0, 100.0, 1e4}) {
    RidgeParams p;
    p.alpha = alpha;
    const double norm = fit_ridge(X, y, p).weights.norm();
    EXPECT_LT(norm, prev);
    prev = norm;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(Ridge, MinimumNormAtZeroAlphaWhenUnderdetermined) {
  const Eigen::MatrixXd X = random_matrix(5, 12, 3);
  const Eigen::VectorXd y = random_vector(5, 4);
  RidgeParams p;
  p.alpha = 0.0;
  p.fit_intercept = false;
  const RidgeModel m = fit_ridge(X, y, p);
  const Eigen::VectorXd ref = X.transpose() * (X * X.transpose()).inverse() * y;
  EXPECT_LT((m.weights - ref).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Ridge, SolverNamesRoundTrip) {
  for (auto s : {RidgeSolver::kSvd, RidgeSolver::kCholesky, RidgeSolver::kLsqr, RidgeSolver::kSag}) {
    EXPECT_EQ(parse_ridge_solver(to_string(s)), s);
  }
  EXPECT_FCPRED_ERROR(parse_ridge_solver("qr"), ErrorCode::kInvalidSpec);
}

TEST(Standardizer, ZeroMeanUnitScaleAndConstantColumns) {
  Eigen::MatrixXd X = random_matrix(25, 4, 7) * 3.0;
  X.col(2).setConstant(5.0);
  const Standardizer s = Standardizer::fit(X);
  const Eigen::MatrixXd Z = s.transform(X);
  EXPECT_LT(Z.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(Z.col(2).isZero(0.0));
  EXPECT_EQ(s.scale(2), 1.0);
  const Standardizer back = standardizer_from_json(to_json(s));
  EXPECT_EQ(back.mean, s.mean);
  EXPECT_EQ(back.scale, s.scale);
}

// Brute-force best single split by SSE over all midpoints.
double best_stump_sse(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  double best = (y.array() - y.mean()).square().sum();
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    std::set<double> values(X.col(j).data(), X.col(j).data() + X.rows());
    std::vector<double> v(values.begin(), values.end());
    for (std::size_t k = 1; k < v.size(); ++k) {
      const double thr = 0.5 * (v[k - 1] + v[k]);
      double sl = 0, sr = 0;
      int nl = 0, nr = 0;
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        if (X(i, j) < thr) {
          sl += y(i);
          ++nl;
        } else {
          sr += y(i);
          ++nr;
        }
      }
      double sse = 0.0;
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double mu = X(i, j) < thr ? sl / nl : sr / nr;
        sse += (y(i) - mu) * (y(i) - mu);
      }
      best = std::min(best, sse);
    }
  }
  return best;
}

TEST(Tree, StumpMatchesBruteForceSplit) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd X = random_matrix(23, 3, seed);
    const Eigen::VectorXd y = random_vector(23, seed + 1000);
    TreeParams p;
    p.max_depth = 1;
    const TreeModel t = fit_tree(X, y, p);
    const double sse = (t.predict(X) - y).squaredNorm();
    EXPECT_NEAR(sse, best_stump_sse(X, y), 1e-9) << "seed " << seed;
  }
}

TEST(Tree, UnlimitedDepthInterpolatesDistinctRows) {
  const Eigen::MatrixXd X = random_matrix(40, 2, 3);
  const Eigen::VectorXd y = random_vector(40, 4);
  const TreeModel t = fit_tree(X, y, {});
  EXPECT_LT((t.predict(X) - y).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(t.leaf_count(), 40);
}

TEST(Tree, StructuralInvariants) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd X = random_matrix(60, 4, seed);
    const Eigen::VectorXd y = random_vector(60, seed + 7);
    TreeParams p;
    p.max_depth = 4;
    p.min_samples_leaf = 3;
    p.min_samples_split = 8;
    const TreeModel t = fit_tree(X, y, p);
    EXPECT_LE(t.depth(), 4);
    for (const TreeNode& n : t.nodes) {
      if (n.is_leaf()) {
        EXPECT_GE(n.n_samples, 3);
      } else {
        EXPECT_GE(n.n_samples, 8);
        EXPECT_EQ(t.nodes[n.left].n_samples + t.nodes[n.right].n_samples, n.n_samples);
      }
    }
    // Predictions lie inside the target range.
    const Eigen::VectorXd pr = t.predict(random_matrix(30, 4, seed + 99));
    EXPECT_GE(pr.minCoeff(), y.minCoeff());
    EXPECT_LE(pr.maxCoeff(), y.maxCoeff());
  }
}

TEST(Tree, ConstantTargetIsSingleLeaf) {
  const TreeModel t = fit_tree(random_matrix(20, 3, 1), Eigen::VectorXd::Constant(20, 2.5), {});
  EXPECT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.predict(random_matrix(3, 3, 2)), Eigen::VectorXd::Constant(3, 2.5));
}

TEST(Tree, JsonRoundTrip) {
  const Eigen::MatrixXd X = random_matrix(30, 3, 5);
  const TreeModel t = fit_tree(X, random_vector(30, 6), {});
  const TreeModel back = tree_from_json(to_json(t));
  EXPECT_EQ(back.predict(X), t.predict(X));
}

TEST(Forest, DeterministicPerSeedAndThreadCount) {
  const Eigen::MatrixXd X = random_matrix(50, 5, 1);
  const Eigen::VectorXd y = random_vector(50, 2);
  ForestParams p;
  p.n_estimators = 20;
  const ForestModel a = fit_forest(X, y, p, 7, 1);
  const ForestModel b = fit_forest(X, y, p, 7, 3);
  const ForestModel c = fit_forest(X, y, p, 8, 1);
  EXPECT_EQ(a.predict(X), b.predict(X));
  EXPECT_NE(a.predict(X), c.predict(X));
}

TEST(Forest, MeanOfTreesAndNoBootstrapAllFeaturesEqualsTree) {
  const Eigen::MatrixXd X = random_matrix(40, 3, 3);
  const Eigen::VectorXd y = random_vector(40, 4);
  ForestParams p;
  p.n_estimators = 5;
  p.bootstrap = false;
  p.max_features = 0;
  const ForestModel f = fit_forest(X, y, p, 1);
  EXPECT_LT((f.predict(X) - fit_tree(X, y, p.tree).predict(X)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forest, LearnsSignal) {
  const Eigen::MatrixXd X = random_matrix(200, 4, 5);
  const Eigen::VectorXd y = 3.0 * X.col(0).array().sign().matrix() + 0.1 * random_vector(200, 6);
  ForestParams p;
  p.n_estimators = 30;
  const ForestModel f = fit_forest(X, y, p, 2);
  const Eigen::MatrixXd Xt = random_matrix(100, 4, 7);
  const Eigen::VectorXd yt = 3.0 * Xt.col(0).array().sign().matrix();
  EXPECT_LT(std::sqrt((f.predict(Xt) - yt).squaredNorm() / 100.0), 1.0);
}

TEST(Gboost, TrainingLossIsNonIncreasing) {
  const Eigen::MatrixXd X = random_matrix(80, 4, 1);
  const Eigen::VectorXd y = X.col(0).array().square().matrix() + X.col(1);
  GboostParams p;
  p.n_estimators = 60;
  const GboostModel m = fit_gboost(X, y, p, 3);
  ASSERT_EQ(m.train_rmse.size(), 61u);
  for (std::size_t i = 1; i < m.train_rmse.size(); ++i) {
    EXPECT_LE(m.train_rmse[i], m.train_rmse[i - 1] + 1e-12);
  }
  EXPECT_LT(m.train_rmse.back(), 0.3 * m.train_rmse.front());
  EXPECT_NEAR(m.base, y.mean(), 1e-12);
}

TEST(Gboost, SingleRoundFullSampleIsShrunkTree) {
  const Eigen::MatrixXd X = random_matrix(30, 3, 2);
  const Eigen::VectorXd y = random_vector(30, 3);
  GboostParams p;
  p.n_estimators = 1;
  p.learning_rate = 0.3;
  p.leaf_l2 = 0.0;
  const GboostModel m = fit_gboost(X, y, p, 0);
  TreeParams tp;
  tp.max_depth = p.max_depth;
  const Eigen::VectorXd r = y.array() - y.mean();
  const Eigen::VectorXd expected = (0.3 * fit_tree(X, r, tp).predict(X)).array() + y.mean();
  EXPECT_LT((m.predict(X) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gboost, SubsamplingIsSeeded) {
  const Eigen::MatrixXd X = random_matrix(40, 5, 4);
  const Eigen::VectorXd y = random_vector(40, 5);
  GboostParams p;
  p.subsample = 0.6;
  p.colsample_bytree = 0.6;
  p.n_estimators = 10;
  EXPECT_EQ(fit_gboost(X, y, p, 1).predict(X), fit_gboost(X, y, p, 1).predict(X));
  EXPECT_NE(fit_gboost(X, y, p, 1).predict(X), fit_gboost(X, y, p, 2).predict(X));
}

}  // namespace
}  // namespace fcpred::ml
