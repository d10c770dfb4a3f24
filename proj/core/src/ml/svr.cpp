#include "fcpred/ml/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fcpred/error.hpp"

namespace fcpred::ml {
namespace {

constexpr double kTau = 1e-12;

struct Problem {
  int l = 0;
  Eigen::MatrixXd K;  // n x n kernel
  std::vector<double> sign;
  std::vector<double> lin;
  std::vector<double> qd;

  double Q(int i, int j) const {
    const int n = static_cast<int>(K.rows());
    return sign[i] * sign[j] * K(i % n, j % n);
  }
};

}  // namespace

std::string_view to_string(Kernel k) {
  switch (k) {
    case Kernel::kLinear: return "linear";
    case Kernel::kPoly: return "poly";
    case Kernel::kRbf: return "rbf";
  }
  return "?";
}

Kernel parse_kernel(std::string_view s) {
  if (s == "linear") return Kernel::kLinear;
  if (s == "poly" || s == "polynomial") return Kernel::kPoly;
  if (s == "rbf") return Kernel::kRbf;
  throw Error(ErrorCode::kInvalidSpec, "unknown kernel '" + std::string(s) + "'");
}

double kernel_value(const SvrParams& p, const Eigen::Ref<const Eigen::RowVectorXd>& a,
                    const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  switch (p.kernel) {
    case Kernel::kLinear: return a.dot(b);
    case Kernel::kPoly: return std::pow(p.gamma * a.dot(b) + 1.0, p.degree);
    case Kernel::kRbf: return std::exp(-p.gamma * (a - b).squaredNorm());
  }
  return 0.0;
}

Eigen::MatrixXd kernel_matrix(const SvrParams& p, const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.rows(); ++j) K(i, j) = kernel_value(p, A.row(i), B.row(j));
  }
  return K;
}

Eigen::VectorXd SvrModel::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), bias);
  if (coef.size() > 0) {
    require(X.cols() == support.cols(), ErrorCode::kShapeMismatch, "SVR feature count mismatch");
    out += kernel_matrix(params, X, support) * coef;
  }
  return out;
}

SvrModel fit_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrParams& params) {
  require(X.rows() > 0 && X.cols() > 0, ErrorCode::kEmptyInput, "SVR needs data");
  require(X.rows() == y.size(), ErrorCode::kShapeMismatch, "X rows and y length differ");
  require(X.allFinite() && y.allFinite(), ErrorCode::kInvalidArgument,
          "SVR inputs must be finite");
  require(params.C > 0.0, ErrorCode::kInvalidSpec, "C must be > 0");
  require(params.kernel == Kernel::kLinear || params.gamma > 0.0, ErrorCode::kInvalidSpec,
          "gamma must be > 0 for nonlinear kernels");
  require(params.epsilon >= 0.0, ErrorCode::kInvalidSpec, "epsilon must be >= 0");
  require(params.tol > 0.0, ErrorCode::kInvalidSpec, "tol must be > 0");

  const int n = static_cast<int>(X.rows());
  const double C = params.C;
  Problem pr;
  pr.l = 2 * n;
  pr.K = kernel_matrix(params, X, X);
  pr.sign.resize(pr.l);
  pr.lin.resize(pr.l);
  pr.qd.resize(pr.l);
  for (int i = 0; i < n; ++i) {
    pr.sign[i] = 1.0;
    pr.sign[i + n] = -1.0;
    pr.lin[i] = params.epsilon - y(i);
    pr.lin[i + n] = params.epsilon + y(i);
    pr.qd[i] = pr.qd[i + n] = pr.K(i, i);
  }

  const int l = pr.l;
  std::vector<double> alpha(l, 0.0);
  std::vector<double> G(pr.lin);
  auto at_upper = [&](int i) { return alpha[i] >= C; };
  auto at_lower = [&](int i) { return alpha[i] <= 0.0; };

  auto beta_of = [&] {
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = alpha[i] - alpha[i + n];
    return b;
  };
  auto compute_rho = [&] {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -ub;
    double sum_free = 0.0;
    int n_free = 0;
    for (int i = 0; i < l; ++i) {
      const double yG = pr.sign[i] * G[i];
      if (at_upper(i)) {
        if (pr.sign[i] < 0) ub = std::min(ub, yG); else lb = std::max(lb, yG);
      } else if (at_lower(i)) {
        if (pr.sign[i] > 0) ub = std::min(ub, yG); else lb = std::max(lb, yG);
      } else {
        ++n_free;
        sum_free += yG;
      }
    }
    return n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  };
  // Returns {dual (minimization form), primal} for the current iterate.
  auto objectives = [&](double rho) {
    double dual = 0.0;
    for (int i = 0; i < l; ++i) dual += alpha[i] * (G[i] + pr.lin[i]);
    dual *= 0.5;
    const Eigen::VectorXd beta = beta_of();
    const Eigen::VectorXd Kb = pr.K * beta;
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
      loss += std::max(0.0, std::abs(y(i) - (Kb(i) - rho)) - params.epsilon);
    }
    const double primal = 0.5 * beta.dot(Kb) + C * loss;
    return std::pair{dual, primal};
  };

  double kkt_eps = 1e-3;
  long long iter = 0;
  SvrModel model;
  model.params = params;
  double rho = 0.0;
  while (true) {
    // Second-order working set selection.
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    int i_sel = -1;
    int j_sel = -1;
    for (int t = 0; t < l; ++t) {
      if (pr.sign[t] > 0) {
        if (!at_upper(t) && -G[t] >= gmax) { gmax = -G[t]; i_sel = t; }
      } else {
        if (!at_lower(t) && G[t] >= gmax) { gmax = G[t]; i_sel = t; }
      }
    }
    double best_obj = std::numeric_limits<double>::infinity();
    if (i_sel >= 0) {
      const int i = i_sel;
      for (int j = 0; j < l; ++j) {
        double diff = 0.0;
        if (pr.sign[j] > 0) {
          if (at_lower(j)) continue;
          diff = gmax + G[j];
          gmax2 = std::max(gmax2, G[j]);
        } else {
          if (at_upper(j)) continue;
          diff = gmax - G[j];
          gmax2 = std::max(gmax2, -G[j]);
        }
        if (diff > 0.0) {
          double quad = pr.qd[i] + pr.qd[j] - 2.0 * pr.sign[i] * pr.sign[j] * pr.Q(i, j);
          if (quad <= 0.0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best_obj) { best_obj = obj; j_sel = j; }
        }
      }
    }

    if (i_sel < 0 || j_sel < 0 || gmax + gmax2 < kkt_eps) {
      rho = compute_rho();
      const auto [dual, primal] = objectives(rho);
      const double gap = primal + dual;
      model.dual_objective = dual;
      model.primal_objective = primal;
      if (gap <= params.tol * std::max(1.0, std::abs(dual)) || kkt_eps < 1e-15) break;
      kkt_eps *= 0.1;
      if (i_sel < 0 || j_sel < 0) break;
      continue;
    }
    if (++iter > params.max_iter) {
      rho = compute_rho();
      const auto [dual, primal] = objectives(rho);
      throw Error(ErrorCode::kConvergence,
                  "SVR did not converge in " + std::to_string(params.max_iter) +
                      " iterations; duality gap " + std::to_string(primal + dual));
    }

    const int i = i_sel;
    const int j = j_sel;
    const double old_i = alpha[i];
    const double old_j = alpha[j];
    const double qij = pr.Q(i, j);
    if (pr.sign[i] != pr.sign[j]) {
      double quad = pr.qd[i] + pr.qd[j] + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
      } else {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
      }
    } else {
      double quad = pr.qd[i] + pr.qd[j] - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > C) {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }
    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (int k = 0; k < l; ++k) G[k] += pr.Q(i, k) * di + pr.Q(j, k) * dj;
  }

  model.iterations = iter;
  model.bias = -rho;
  const Eigen::VectorXd beta = beta_of();
  std::vector<int> sv;
  for (int i = 0; i < n; ++i) {
    if (beta(i) != 0.0) sv.push_back(i);
  }
  model.support.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
  model.coef.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    model.support.row(static_cast<Eigen::Index>(k)) = X.row(sv[k]);
    model.coef(static_cast<Eigen::Index>(k)) = beta(sv[k]);
  }
  return model;
}

}  // namespace fcpred::ml
