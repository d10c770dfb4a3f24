#pragma once

#include <Eigen/Dense>
#include <string_view>

namespace fcpred::ml {

enum class Kernel { kLinear, kPoly, kRbf };

std::string_view to_string(Kernel k);
Kernel parse_kernel(std::string_view s);

struct SvrParams {
  double C = 1.0;
  double gamma = 0.1;
  Kernel kernel = Kernel::kRbf;
  double epsilon = 0.1;
  int degree = 3;  // polynomial kernel (gamma <x, x'> + 1)^degree
  // Relative duality gap at which the solver stops.
  double tol = 1e-6;
  long long max_iter = 1000000;
};

double kernel_value(const SvrParams& p, const Eigen::Ref<const Eigen::RowVectorXd>& a,
                    const Eigen::Ref<const Eigen::RowVectorXd>& b);
Eigen::MatrixXd kernel_matrix(const SvrParams& p, const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B);

struct SvrModel {
  SvrParams params;
  Eigen::MatrixXd support;  // support vectors, one per row
  Eigen::VectorXd coef;     // beta_i = alpha_i - alpha_i^* for each support vector
  double bias = 0.0;
  // Dual objective in minimization form:
  //   1/2 beta' K beta + eps ||beta||_1 - y' beta
  double dual_objective = 0.0;
  double primal_objective = 0.0;
  long long iterations = 0;

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

// epsilon-SVR by SMO on the 2n-variable dual with second-order working set
// selection. Throws kConvergence, reporting the gap, when max_iter is hit.
SvrModel fit_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrParams& params);

}  // namespace fcpred::ml
