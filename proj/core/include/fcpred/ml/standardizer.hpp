#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace fcpred::ml {

// Per-feature z-scoring with statistics from the training rows. Constant
// features keep scale 1 so they map to 0.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
};

nlohmann::json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

}  // namespace fcpred::ml
