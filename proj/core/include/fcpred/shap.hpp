#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "fcpred/features.hpp"

namespace fcpred {

// Batch prediction: one output per input row.
using PredictFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

// Coalition value: mean prediction over background rows with the features in
// the coalition (and every feature outside `varying`) set to the instance.
// Exact enumeration and the kernel estimator share this definition.

constexpr int kMaxExactFeatures = 12;

// Shapley values of the features in `subset` (at most 12); other features
// stay at their instance values. Result is aligned with `subset`.
Eigen::VectorXd exact_shapley(const PredictFn& f, const Eigen::RowVectorXd& instance,
                              const Eigen::MatrixXd& background, const std::vector<int>& subset);

struct KernelShapResult {
  Eigen::VectorXd values;  // one per feature
  double base_value = 0.0;
  double prediction = 0.0;
  int coalitions = 0;  // distinct coalitions evaluated
};

// Kernel SHAP over all features. Coalition sizes are enumerated exhaustively
// (complement pairs together) while the budget allows, the rest are sampled
// from the Shapley kernel. Features equal to the instance in every background
// row get exactly 0. Throws kInvalidArgument when nsamples < 2p + 2 and
// kSingularFit when the sampled design is rank deficient.
KernelShapResult kernel_shap(const PredictFn& f, const Eigen::RowVectorXd& instance,
                             const Eigen::MatrixXd& background, int nsamples, std::uint64_t seed);

// Up to cap rows chosen by sorting on y and taking evenly spaced ranks.
std::vector<int> background_rows(const Eigen::VectorXd& y, int cap);

struct ShapExplanation {
  double base_value = 0.0;
  Eigen::MatrixXd values;     // instances x features
  Eigen::MatrixXd instances;  // feature values of the explained rows
  Eigen::VectorXd predictions;
  std::vector<std::string> instance_ids;
  std::string background_ref;  // fingerprint of the background matrix
  int background_rows = 0;
  int nsamples = 0;
  std::uint64_t seed = 0;
};

struct ShapOptions {
  int nsamples = 2048;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Instance i uses seed derive_seed(options.seed, i).
ShapExplanation explain(const PredictFn& f, const Eigen::MatrixXd& instances,
                        const Eigen::MatrixXd& background, const ShapOptions& options);

std::string matrix_fingerprint(const Eigen::MatrixXd& M);

struct ShapSummaryRow {
  int rank = 0;  // 1-based
  int feature_index = 0;
  std::string roi_a;
  std::string roi_b;
  double mean_abs = 0.0;
};

// Descending mean |value|; ties go to the lower feature index.
std::vector<ShapSummaryRow> shap_summary(const ShapExplanation& e, const FeatureMeta& meta);

// rank, feature_index, roi_a, roi_b, mean_abs_shap
std::string summary_csv(const std::vector<ShapSummaryRow>& rows);
// Plot-ready records: instance, feature_index, shap_value, feature_value
std::string points_csv(const ShapExplanation& e);

nlohmann::json to_json(const ShapExplanation& e);
ShapExplanation explanation_from_json(const nlohmann::json& j);

}  // namespace fcpred
