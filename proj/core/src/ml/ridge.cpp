#include "fcpred/ml/ridge.hpp"

#include <cmath>
#include <limits>

#include "fcpred/error.hpp"
#include "fcpred/random.hpp"

namespace fcpred::ml {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd solve_svd(const MatrixXd& X, const VectorXd& y, double alpha) {
  Eigen::BDCSVD<MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  const double cutoff = s.size() ? s(0) * 1e-12 * static_cast<double>(std::max(X.rows(), X.cols()))
                                 : 0.0;
  VectorXd uty = svd.matrixU().transpose() * y;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (alpha == 0.0 && s(i) <= cutoff) {
      uty(i) = 0.0;
    } else {
      uty(i) *= s(i) / (s(i) * s(i) + alpha);
    }
  }
  return svd.matrixV() * uty;
}

VectorXd solve_cholesky(const MatrixXd& X, const VectorXd& y, double alpha) {
  // Work in whichever of the primal (p x p) or dual (n x n) Gram matrices is
  // smaller; both give the same optimum.
  if (X.cols() <= X.rows()) {
    MatrixXd gram = X.transpose() * X;
    gram.diagonal().array() += alpha;
    Eigen::LLT<MatrixXd> llt(gram);
    require(llt.info() == Eigen::Success, ErrorCode::kSingularFit,
            "ridge normal equations not positive definite (alpha too small?)");
    return llt.solve(X.transpose() * y);
  }
  MatrixXd gram = X * X.transpose();
  gram.diagonal().array() += alpha;
  Eigen::LLT<MatrixXd> llt(gram);
  require(llt.info() == Eigen::Success, ErrorCode::kSingularFit,
          "ridge dual system not positive definite (alpha too small?)");
  return X.transpose() * llt.solve(y);
}

// LSQR (Paige & Saunders) with damping sqrt(alpha). Stops on the exact
// normal-equation residual ||X'(y - Xw) - alpha w||.
VectorXd solve_lsqr(const MatrixXd& X, const VectorXd& y, double alpha, double tol,
                    int& iterations) {
  const double damp = std::sqrt(alpha);
  VectorXd x = VectorXd::Zero(X.cols());
  const double bnorm = y.norm();
  if (bnorm == 0.0) return x;
  const double gscale = (X.transpose() * y).norm();
  if (gscale == 0.0) return x;

  VectorXd u = y / bnorm;
  VectorXd v = X.transpose() * u;
  double a = v.norm();
  v /= a;
  VectorXd w = v;
  double phibar = bnorm, rhobar = a;

  const int max_iter = 50 * static_cast<int>(std::max(X.rows(), X.cols())) + 100;
  for (iterations = 1; iterations <= max_iter; ++iterations) {
    u = X * v - a * u;
    const double b = u.norm();
    if (b > 0.0) u /= b;
    v = X.transpose() * u - b * v;
    a = v.norm();
    if (a > 0.0) v /= a;

    const double rhobar1 = std::hypot(rhobar, damp);
    const double cs1 = rhobar / rhobar1;
    phibar = cs1 * phibar;
    const double rho = std::hypot(rhobar1, b);
    const double cs = rhobar1 / rho;
    const double sn = b / rho;
    const double theta = sn * a;
    rhobar = -cs * a;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    x += (phi / rho) * w;
    w = v - (theta / rho) * w;

    const VectorXd g = X.transpose() * (y - X * x) - alpha * x;
    if (g.norm() <= tol * gscale || a == 0.0) return x;
  }
  throw Error(ErrorCode::kConvergence, "lsqr did not converge");
}

// Stochastic average gradient on (1/2n) sum (x_i'w - y_i)^2 + (alpha/2n)||w||^2.
VectorXd solve_sag(const MatrixXd& X, const VectorXd& y, double alpha, double tol,
                   std::uint64_t seed, int& epochs) {
  const Eigen::Index n = X.rows(), p = X.cols();
  const double l = X.rowwise().squaredNorm().maxCoeff() + alpha / static_cast<double>(n);
  VectorXd w = VectorXd::Zero(p);
  if (!(l > 0.0)) return w;
  const double step = 1.0 / l;
  const double shrink = 1.0 - step * alpha / static_cast<double>(n);

  VectorXd grad_sum = VectorXd::Zero(p);
  VectorXd memory = VectorXd::Zero(n);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  double seen_count = 0.0;
  Rng rng(seed);
  constexpr int kMaxEpochs = 200000;
  for (epochs = 1; epochs <= kMaxEpochs; ++epochs) {
    const VectorXd prev = w;
    for (Eigen::Index it = 0; it < n; ++it) {
      const auto i = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      if (!seen[i]) {
        seen[i] = 1;
        seen_count += 1.0;
      }
      const double r = X.row(i).dot(w) - y(i);
      grad_sum += (r - memory(i)) * X.row(i).transpose();
      memory(i) = r;
      w = shrink * w - (step / seen_count) * grad_sum;
    }
    const double change = (w - prev).cwiseAbs().maxCoeff();
    const double scale = w.cwiseAbs().maxCoeff();
    if (change <= tol * std::max(scale, std::numeric_limits<double>::min())) return w;
    require(w.allFinite(), ErrorCode::kDiverged, "sag iterates diverged");
  }
  throw Error(ErrorCode::kConvergence, "sag did not converge");
}

}  // namespace

std::string_view to_string(RidgeSolver s) {
  switch (s) {
    case RidgeSolver::kSvd: return "svd";
    case RidgeSolver::kCholesky: return "cholesky";
    case RidgeSolver::kLsqr: return "lsqr";
    case RidgeSolver::kSag: return "sag";
  }
  return "svd";
}

RidgeSolver parse_ridge_solver(std::string_view s) {
  if (s == "svd") return RidgeSolver::kSvd;
  if (s == "cholesky") return RidgeSolver::kCholesky;
  if (s == "lsqr") return RidgeSolver::kLsqr;
  if (s == "sag") return RidgeSolver::kSag;
  throw Error(ErrorCode::kInvalidSpec, "unknown ridge solver '" + std::string(s) + "'");
}

Eigen::VectorXd RidgeModel::predict(const Eigen::MatrixXd& X) const {
  require(X.cols() == weights.size(), ErrorCode::kShapeMismatch,
          "ridge model expects " + std::to_string(weights.size()) + " features");
  return (X * weights).array() + intercept;
}

RidgeModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const RidgeParams& params) {
  require(X.rows() > 0 && X.cols() > 0, ErrorCode::kEmptyInput, "ridge needs data");
  require(X.rows() == y.size(), ErrorCode::kShapeMismatch, "X rows and y length differ");
  require(X.allFinite() && y.allFinite(), ErrorCode::kInvalidArgument,
          "ridge inputs must be finite");
  require(params.alpha >= 0.0 && std::isfinite(params.alpha), ErrorCode::kInvalidSpec,
          "ridge alpha must be finite and >= 0");

  Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(X.cols());
  double y_mean = 0.0;
  if (params.fit_intercept) {
    x_mean = X.colwise().mean();
    y_mean = y.mean();
  }
  const MatrixXd Xc = X.rowwise() - x_mean;
  const VectorXd yc = y.array() - y_mean;

  RidgeModel model;
  switch (params.solver) {
    case RidgeSolver::kSvd:
      model.weights = solve_svd(Xc, yc, params.alpha);
      break;
    case RidgeSolver::kCholesky:
      model.weights = solve_cholesky(Xc, yc, params.alpha);
      break;
    case RidgeSolver::kLsqr:
      model.weights = solve_lsqr(Xc, yc, params.alpha, params.tol, model.iterations);
      break;
    case RidgeSolver::kSag:
      model.weights = solve_sag(Xc, yc, params.alpha, params.tol, params.seed, model.iterations);
      break;
  }
  model.intercept = params.fit_intercept ? y_mean - x_mean.dot(model.weights) : 0.0;
  require(model.weights.allFinite() && std::isfinite(model.intercept), ErrorCode::kDiverged,
          "ridge solution not finite");
  return model;
}

}  // namespace fcpred::ml
