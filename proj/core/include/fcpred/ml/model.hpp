#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <variant>

#include "fcpred/ml/forest.hpp"
#include "fcpred/ml/gboost.hpp"
#include "fcpred/ml/hyperparams.hpp"
#include "fcpred/ml/mlp.hpp"
#include "fcpred/ml/ridge.hpp"
#include "fcpred/ml/standardizer.hpp"
#include "fcpred/ml/svr.hpp"
#include "fcpred/ml/tree.hpp"

namespace fcpred::ml {

// Settings that are not grid hyperparameters.
struct FitOptions {
  std::uint64_t seed = 0;
  int mlp_epochs = 2000;
  double svr_tol = 1e-6;
  int threads = 1;  // forest trees
};

using LearnedParams =
    std::variant<RidgeModel, TreeModel, ForestModel, SvrModel, GboostModel, MlpModel>;

// Family-agnostic fitted model. Ridge, SVR and MLP see z-scored features
// (statistics from the training rows); the MLP also trains on a z-scored
// target. Tree ensembles use raw inputs.
struct FittedModel {
  HyperparameterSet hp;
  std::uint64_t seed = 0;
  int n_features = 0;
  std::optional<Standardizer> scaler;
  double target_mean = 0.0;
  double target_scale = 1.0;
  LearnedParams learned;

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

RidgeParams ridge_params(const HyperparameterSet& hp);
TreeParams tree_params(const HyperparameterSet& hp);
ForestParams forest_params(const HyperparameterSet& hp);
SvrParams svr_params(const HyperparameterSet& hp, double tol);
GboostParams gboost_params(const HyperparameterSet& hp);
MlpParams mlp_params(const HyperparameterSet& hp, int epochs);

FittedModel fit_model(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const HyperparameterSet& hp, const FitOptions& opts = {});

nlohmann::json to_json(const FittedModel& m);
FittedModel model_from_json(const nlohmann::json& j);

}  // namespace fcpred::ml
