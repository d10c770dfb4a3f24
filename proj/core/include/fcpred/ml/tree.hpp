#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <vector>

#include "fcpred/random.hpp"

namespace fcpred::ml {

struct TreeParams {
  int max_depth = -1;  // < 0: unbounded; root has depth 0
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  int max_features = 0;  // features drawn per split; <= 0 means all
  // Leaf value = sum / (count + leaf_l2); the split gain uses the same
  // regularized score. 0 gives plain CART variance reduction.
  double leaf_l2 = 0.0;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // x < threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;
  int n_samples = 0;
  int depth = 0;

  bool is_leaf() const { return feature < 0; }
};

struct TreeModel {
  std::vector<TreeNode> nodes;

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  int depth() const;
  int leaf_count() const;
};

// CART regression tree on every row and feature. Ties between candidate
// splits go to the lowest feature index, then the lowest threshold.
TreeModel fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeParams& params);

// Tree on a row multiset (duplicates allowed, e.g. a bootstrap sample) and a
// subset of allowed features. rng is required when params.max_features
// restricts the per-split candidates.
TreeModel build_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const std::vector<int>& rows, const std::vector<int>& features,
                     const TreeParams& params, Rng* rng);

nlohmann::json to_json(const TreeModel& t);
TreeModel tree_from_json(const nlohmann::json& j);

}  // namespace fcpred::ml
