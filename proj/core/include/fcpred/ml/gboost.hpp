#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fcpred/ml/tree.hpp"

namespace fcpred::ml {

struct GboostParams {
  double learning_rate = 0.1;
  int max_depth = 3;  // < 0: unbounded
  double subsample = 1.0;
  double colsample_bytree = 1.0;
  int n_estimators = 100;
  double leaf_l2 = 1.0;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
};

struct GboostModel {
  double base = 0.0;
  double learning_rate = 0.1;
  std::vector<TreeModel> trees;
  // Training RMSE after 0, 1, ..., n_estimators rounds.
  std::vector<double> train_rmse;

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

GboostModel fit_gboost(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const GboostParams& params, std::uint64_t seed);

}  // namespace fcpred::ml
