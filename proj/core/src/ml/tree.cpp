#include "fcpred/ml/tree.hpp"

#include <algorithm>
#include <numeric>

#include "fcpred/error.hpp"

namespace fcpred::ml {
namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class Builder {
 public:
  Builder(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<int>& features,
          const TreeParams& params, Rng* rng)
      : X_(X), y_(y), features_(features), params_(params), rng_(rng) {}

  TreeModel build(std::vector<int> rows) {
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  double score(double sum, double count) const { return sum * sum / (count + params_.leaf_l2); }

  std::vector<int> candidate_features() {
    const int k = params_.max_features;
    if (k <= 0 || k >= static_cast<int>(features_.size())) return features_;
    require(rng_ != nullptr, ErrorCode::kInvalidArgument,
            "feature subsampling needs a random stream");
    std::vector<int> pool = features_;
    for (int i = 0; i < k; ++i) {
      const auto j = i + static_cast<int>(rng_->uniform_index(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  SplitChoice best_split(const std::vector<int>& rows, double total) {
    const int m = static_cast<int>(rows.size());
    const int min_leaf = std::max(1, params_.min_samples_leaf);
    SplitChoice best;
    double scale = 0.0;
    for (int r : rows) scale += y_(r) * y_(r);
    const double min_gain = 1e-12 * scale;
    const double parent = score(total, m);

    std::vector<std::pair<double, double>> pairs(rows.size());
    for (int f : candidate_features()) {
      for (int i = 0; i < m; ++i) pairs[i] = {X_(rows[i], f), y_(rows[i])};
      std::stable_sort(pairs.begin(), pairs.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      double left = 0.0;
      for (int k = 1; k < m; ++k) {
        left += pairs[k - 1].second;
        if (k < min_leaf || m - k < min_leaf) continue;
        if (!(pairs[k - 1].first < pairs[k].first)) continue;
        const double gain = score(left, k) + score(total - left, m - k) - parent;
        if (gain > best.gain && gain > min_gain) {
          double thr = 0.5 * (pairs[k - 1].first + pairs[k].first);
          if (!(thr > pairs[k - 1].first)) thr = pairs[k].first;
          best = {f, thr, gain};
        }
      }
    }
    return best;
  }

  int grow(std::vector<int> rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double total = 0.0;
    for (int r : rows) total += y_(r);
    const int m = static_cast<int>(rows.size());
    {
      TreeNode& node = tree_.nodes[id];
      node.n_samples = m;
      node.depth = depth;
      node.value = total / (m + params_.leaf_l2);
    }

    const bool depth_ok = params_.max_depth < 0 || depth < params_.max_depth;
    if (!depth_ok || m < std::max(2, params_.min_samples_split) ||
        m < 2 * std::max(1, params_.min_samples_leaf)) {
      return id;
    }
    const SplitChoice split = best_split(rows, total);
    if (split.feature < 0) return id;

    std::vector<int> left, right;
    for (int r : rows) (X_(r, split.feature) < split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    TreeNode& node = tree_.nodes[id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  const std::vector<int>& features_;
  const TreeParams& params_;
  Rng* rng_;
  TreeModel tree_;
};

}  // namespace

double TreeModel::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int i = 0;
  while (!nodes[i].is_leaf()) {
    i = x(nodes[i].feature) < nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return nodes[i].value;
}

Eigen::VectorXd TreeModel::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict_row(X.row(i));
  return out;
}

int TreeModel::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

int TreeModel::leaf_count() const {
  return static_cast<int>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

TreeModel build_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const std::vector<int>& rows, const std::vector<int>& features,
                     const TreeParams& params, Rng* rng) {
  require(!rows.empty(), ErrorCode::kEmptyInput, "tree needs at least one row");
  require(!features.empty(), ErrorCode::kEmptyInput, "tree needs at least one feature");
  require(params.min_samples_split >= 1 && params.min_samples_leaf >= 1,
          ErrorCode::kInvalidSpec, "tree sample constraints must be positive");
  require(params.leaf_l2 >= 0.0, ErrorCode::kInvalidSpec, "leaf_l2 must be >= 0");
  Builder b(X, y, features, params, rng);
  return b.build(rows);
}

TreeModel fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeParams& params) {
  require(X.rows() > 0 && X.cols() > 0, ErrorCode::kEmptyInput, "tree needs data");
  require(X.rows() == y.size(), ErrorCode::kShapeMismatch, "X rows and y length differ");
  require(X.allFinite() && y.allFinite(), ErrorCode::kInvalidArgument, "tree inputs must be finite");
  std::vector<int> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<int> features(static_cast<std::size_t>(X.cols()));
  std::iota(features.begin(), features.end(), 0);
  TreeParams p = params;
  p.max_features = 0;
  return build_tree(X, y, rows, features, p, nullptr);
}

nlohmann::json to_json(const TreeModel& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.n_samples, n.depth});
  }
  return nodes;
}

TreeModel tree_from_json(const nlohmann::json& j) {
  TreeModel t;
  for (const auto& n : j) {
    t.nodes.push_back(TreeNode{n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(),
                               n.at(3).get<int>(), n.at(4).get<double>(), n.at(5).get<int>(),
                               n.at(6).get<int>()});
  }
  require(!t.nodes.empty(), ErrorCode::kParse, "tree has no nodes");
  return t;
}

}  // namespace fcpred::ml
