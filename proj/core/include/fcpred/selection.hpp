#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcpred/features.hpp"
#include "fcpred/ml/hyperparams.hpp"
#include "fcpred/ml/model.hpp"

namespace fcpred {

struct FoldPlan {
  int n = 0;
  int k = 0;
  int repeats = 0;
  std::uint64_t seed = 0;
  // assignments[r][i] is the fold of sample i in repeat r.
  std::vector<std::vector<int>> assignments;

  std::vector<int> train_indices(int repeat, int fold) const;
  std::vector<int> validation_indices(int repeat, int fold) const;
};

// Each repeat shuffles [0, n) with its own derived stream and deals the
// permutation into k folds; the first n % k folds get one extra sample.
FoldPlan make_folds(int n, int k, int repeats, std::uint64_t seed);

struct GridSpec {
  ml::Family family = ml::Family::kRidge;
  std::map<std::string, std::vector<ml::ParamValue>> axes;
};

constexpr long long kMaxGridPoints = 2000000;

// Cartesian product (at most kMaxGridPoints); parameter names in sorted
// order, the last name varying fastest, values in listed order.
std::vector<ml::HyperparameterSet> grid_expand(const GridSpec& spec);

// per_decade points per decade on a log scale from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int per_decade);
std::vector<double> linear_grid(double lo, double hi, double step);

// Desk-scale grid (continuous axes log-subsampled, discrete axes thinned) or
// the literal table grid when full is set.
GridSpec default_grid(ml::Family family, bool full = false);
GridSpec grid_from_json(ml::Family family, const nlohmann::json& j);
nlohmann::json to_json(const GridSpec& g);

double rmse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual);
double evaluate_rmse(const ml::FittedModel& model, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y);

struct ConfigResult {
  ml::HyperparameterSet hp;
  bool failed = false;
  std::string error;
  // One entry per (repeat, fold), repeat-major.
  std::vector<double> train_rmse;
  std::vector<double> validation_rmse;
  double train_mean = 0.0;
  double train_sd = 0.0;
  double validation_mean = 0.0;
  double validation_sd = 0.0;
};

struct CvReport {
  ml::Family family = ml::Family::kRidge;
  int k = 0;
  int repeats = 0;
  std::uint64_t seed = 0;
  int n_samples = 0;
  std::vector<ConfigResult> configs;
  int best = -1;
  std::optional<double> test_rmse;
  std::optional<int> n_test;

  const ConfigResult& best_config() const;
};

nlohmann::json to_json(const CvReport& r);
CvReport cv_report_from_json(const nlohmann::json& j);

struct FitAudit {
  int config = 0;
  int repeat = 0;
  int fold = 0;
  std::span<const int> train;
  std::span<const int> validation;
};

struct SearchOptions {
  ml::FitOptions fit;  // fit.seed is replaced per fit
  int threads = 1;
  // Called once per fit, serialized, before the fit runs.
  std::function<void(const FitAudit&)> audit;
  // Optional held-out split scored with the refitted best model.
  const Dataset* test = nullptr;
};

struct SearchResult {
  CvReport report;
  ml::FittedModel best_model;  // best configuration refitted on all rows
};

// Fit seeds are derive_seed(seed, config, repeat, fold), so the outcome does
// not depend on the number of threads.
SearchResult grid_search(const Dataset& data, const GridSpec& grid, const FoldPlan& plan,
                         std::uint64_t seed, const SearchOptions& options = {});

}  // namespace fcpred
