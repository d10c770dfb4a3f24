#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fcpred/ml/tree.hpp"

namespace fcpred::ml {

struct ForestParams {
  int n_estimators = 100;
  TreeParams tree;  // tree.max_features is ignored; see max_features below
  bool bootstrap = true;
  // Features drawn per split: < 0 means ceil(sqrt(p)), 0 means all.
  int max_features = -1;
};

struct ForestModel {
  std::vector<TreeModel> trees;

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

// Tree t draws its bootstrap sample and split features from a stream seeded
// with derive_seed(seed, t), so results do not depend on thread count.
ForestModel fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const ForestParams& params, std::uint64_t seed, int threads = 1);

}  // namespace fcpred::ml
