#include "fcpred/ml/standardizer.hpp"

#include <cmath>

#include "fcpred/error.hpp"

namespace fcpred::ml {

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  require(X.rows() > 0, ErrorCode::kEmptyInput, "cannot standardize an empty matrix");
  Standardizer s;
  s.mean = X.colwise().mean();
  s.scale = ((X.rowwise() - s.mean).array().square().colwise().mean()).sqrt();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
    if (!(s.scale(j) > 1e-12 * std::max(1.0, std::abs(s.mean(j))))) s.scale(j) = 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& X) const {
  require(X.cols() == mean.size(), ErrorCode::kShapeMismatch,
          "standardizer expects " + std::to_string(mean.size()) + " features");
  return (X.rowwise() - mean).array().rowwise() / scale.array();
}

nlohmann::json to_json(const Standardizer& s) {
  return {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"scale", std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size())}};
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
  const auto m = j.at("mean").get<std::vector<double>>();
  const auto sc = j.at("scale").get<std::vector<double>>();
  require(m.size() == sc.size(), ErrorCode::kParse, "standardizer mean/scale size mismatch");
  Standardizer s;
  s.mean = Eigen::Map<const Eigen::RowVectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
  s.scale = Eigen::Map<const Eigen::RowVectorXd>(sc.data(), static_cast<Eigen::Index>(sc.size()));
  return s;
}

}  // namespace fcpred::ml
