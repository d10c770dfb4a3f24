#include "fcpred/ml/forest.hpp"

#include <cmath>
#include <numeric>

#include "fcpred/error.hpp"
#include "fcpred/parallel.hpp"
#include "fcpred/random.hpp"

namespace fcpred::ml {

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& X) const {
  require(!trees.empty(), ErrorCode::kInvalidArgument, "forest has no trees");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(X.rows());
  for (const auto& t : trees) sum += t.predict(X);
  return sum / static_cast<double>(trees.size());
}

ForestModel fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const ForestParams& params, std::uint64_t seed, int threads) {
  require(params.n_estimators >= 1, ErrorCode::kInvalidSpec, "n_estimators must be >= 1");
  require(X.rows() > 0 && X.cols() > 0, ErrorCode::kEmptyInput, "forest needs data");
  require(X.rows() == y.size(), ErrorCode::kShapeMismatch, "X rows and y length differ");
  require(X.allFinite() && y.allFinite(), ErrorCode::kInvalidArgument,
          "forest inputs must be finite");

  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  TreeParams tp = params.tree;
  tp.max_features = params.max_features < 0
                        ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))))
                        : params.max_features;
  std::vector<int> features(static_cast<std::size_t>(p));
  std::iota(features.begin(), features.end(), 0);

  ForestModel model;
  model.trees.resize(static_cast<std::size_t>(params.n_estimators));
  parallel_for(params.n_estimators, threads, [&](int t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<int> rows(static_cast<std::size_t>(n));
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<int>(rng.uniform_index(n));
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    model.trees[t] = build_tree(X, y, rows, features, tp, &rng);
  });
  return model;
}

}  // namespace fcpred::ml
