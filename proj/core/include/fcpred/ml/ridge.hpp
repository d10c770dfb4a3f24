#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string_view>

namespace fcpred::ml {

// All four routes solve the same strictly convex problem (or, at alpha = 0,
// return the minimum-norm least-squares solution).
enum class RidgeSolver { kSvd, kCholesky, kLsqr, kSag };

std::string_view to_string(RidgeSolver s);
RidgeSolver parse_ridge_solver(std::string_view s);

struct RidgeParams {
  double alpha = 1.0;
  bool fit_intercept = true;
  RidgeSolver solver = RidgeSolver::kSvd;
  // Convergence tolerance for the iterative routes (lsqr, sag).
  double tol = 1e-10;
  std::uint64_t seed = 0;  // sag sampling order
};

struct RidgeModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  int iterations = 0;

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

// argmin_w,b ||y - Xw - b||^2 + alpha ||w||^2 (b = 0 without intercept).
RidgeModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const RidgeParams& params);

}  // namespace fcpred::ml
