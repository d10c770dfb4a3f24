#include "fcpred/ml/gboost.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fcpred/error.hpp"
#include "fcpred/random.hpp"

namespace fcpred::ml {
namespace {

double rmse(const Eigen::VectorXd& r) { return std::sqrt(r.squaredNorm() / r.size()); }

// k distinct sorted indices from [0, n).
std::vector<int> sample_sorted(int n, int k, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  if (k >= n) return idx;
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rng.uniform_index(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

Eigen::VectorXd GboostModel::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd f = Eigen::VectorXd::Constant(X.rows(), base);
  for (const auto& t : trees) f += learning_rate * t.predict(X);
  return f;
}

GboostModel fit_gboost(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const GboostParams& params, std::uint64_t seed) {
  require(X.rows() > 0 && X.cols() > 0, ErrorCode::kEmptyInput, "boosting needs data");
  require(X.rows() == y.size(), ErrorCode::kShapeMismatch, "X rows and y length differ");
  require(X.allFinite() && y.allFinite(), ErrorCode::kInvalidArgument,
          "boosting inputs must be finite");
  require(params.learning_rate > 0.0, ErrorCode::kInvalidSpec, "learning_rate must be > 0");
  require(params.subsample > 0.0 && params.subsample <= 1.0, ErrorCode::kInvalidSpec,
          "subsample must be in (0, 1]");
  require(params.colsample_bytree > 0.0 && params.colsample_bytree <= 1.0,
          ErrorCode::kInvalidSpec, "colsample_bytree must be in (0, 1]");
  require(params.n_estimators >= 0, ErrorCode::kInvalidSpec, "n_estimators must be >= 0");

  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  const int n_rows = std::max(1, static_cast<int>(std::lround(params.subsample * n)));
  const int n_cols = std::max(1, static_cast<int>(std::lround(params.colsample_bytree * p)));

  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_samples_split = params.min_samples_split;
  tp.min_samples_leaf = params.min_samples_leaf;
  tp.leaf_l2 = params.leaf_l2;

  GboostModel model;
  model.learning_rate = params.learning_rate;
  model.base = y.mean();
  Eigen::VectorXd f = Eigen::VectorXd::Constant(n, model.base);
  Eigen::VectorXd resid = y - f;
  model.train_rmse.push_back(rmse(resid));

  for (int m = 0; m < params.n_estimators; ++m) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
    const std::vector<int> rows = sample_sorted(n, n_rows, rng);
    const std::vector<int> cols = sample_sorted(p, n_cols, rng);
    TreeModel tree = build_tree(X, resid, rows, cols, tp, nullptr);
    f += params.learning_rate * tree.predict(X);
    resid = y - f;
    model.train_rmse.push_back(rmse(resid));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace fcpred::ml
