#include "fcpred/ml/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <string>

#include "fcpred/error.hpp"
#include "fcpred/random.hpp"

namespace fcpred::ml {
namespace {

void activate(Activation a, Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::kLogistic:
      z = (1.0 + (-z.array()).exp()).inverse().matrix();
      break;
    case Activation::kTanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::kRelu:
      z = z.cwiseMax(0.0);
      break;
  }
}

// Derivative expressed through the activation output.
Eigen::ArrayXXd derivative(Activation a, const Eigen::MatrixXd& out) {
  switch (a) {
    case Activation::kLogistic: return out.array() * (1.0 - out.array());
    case Activation::kTanh: return 1.0 - out.array().square();
    case Activation::kRelu: return (out.array() > 0.0).cast<double>();
  }
  return {};
}

void check_finite_loss(double loss, int epoch) {
  if (!std::isfinite(loss)) {
    throw Error(ErrorCode::kDiverged,
                "MLP training diverged at epoch " + std::to_string(epoch));
  }
}

class EarlyStop {
 public:
  explicit EarlyStop(const MlpParams& p) : tol_(p.tol), patience_(p.n_iter_no_change) {}
  bool update(double loss) {
    if (loss > best_ - tol_) {
      ++stale_;
    } else {
      stale_ = 0;
    }
    best_ = std::min(best_, loss);
    return patience_ > 0 && stale_ >= patience_;
  }

 private:
  double tol_;
  int patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int stale_ = 0;
};

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<int>& idx, int b, int e) {
  Eigen::MatrixXd out(e - b, X.cols());
  for (int i = b; i < e; ++i) out.row(i - b) = X.row(idx[i]);
  return out;
}

Eigen::VectorXd rows_of(const Eigen::VectorXd& y, const std::vector<int>& idx, int b, int e) {
  Eigen::VectorXd out(e - b);
  for (int i = b; i < e; ++i) out(i - b) = y(idx[i]);
  return out;
}

void train_first_order(MlpModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const MlpParams& p, std::uint64_t seed) {
  const int n = static_cast<int>(X.rows());
  const int batch = std::clamp(p.batch_size, 1, n);
  Eigen::VectorXd theta = flatten(m);
  const Eigen::Index dim = theta.size();
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(dim);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  long long step = 0;

  Rng rng(derive_seed(seed, 1));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  EarlyStop stop(p);
  Eigen::VectorXd grad(dim);
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    rng.shuffle(std::span<int>(order));
    double epoch_loss = 0.0;
    for (int b = 0; b < n; b += batch) {
      const int e = std::min(n, b + batch);
      const Eigen::MatrixXd Xb = rows_of(X, order, b, e);
      const Eigen::VectorXd yb = rows_of(y, order, b, e);
      if (p.solver == MlpSolver::kSgd) {
        // Nesterov: gradient at the look-ahead point.
        unflatten(m, theta + p.momentum * velocity);
        const double loss = mlp_loss(m, Xb, yb, p.alpha, &grad);
        check_finite_loss(loss, epoch);
        epoch_loss += loss * (e - b);
        velocity = p.momentum * velocity - p.learning_rate * grad;
        theta += velocity;
      } else {
        unflatten(m, theta);
        const double loss = mlp_loss(m, Xb, yb, p.alpha, &grad);
        check_finite_loss(loss, epoch);
        epoch_loss += loss * (e - b);
        ++step;
        m1 = kBeta1 * m1 + (1.0 - kBeta1) * grad;
        m2 = kBeta2 * m2 + (1.0 - kBeta2) * grad.cwiseProduct(grad);
        const double lr = p.learning_rate * std::sqrt(1.0 - std::pow(kBeta2, step)) /
                          (1.0 - std::pow(kBeta1, step));
        theta.array() -= lr * m1.array() / (m2.array().sqrt() + kEps);
      }
    }
    epoch_loss /= n;
    check_finite_loss(epoch_loss, epoch);
    m.loss_history.push_back(epoch_loss);
    if (stop.update(epoch_loss)) break;
  }
  unflatten(m, theta);
}

void train_lbfgs(MlpModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const MlpParams& p) {
  Eigen::VectorXd theta = flatten(m);
  Eigen::VectorXd grad(theta.size());
  double loss = mlp_loss(m, X, y, p.alpha, &grad);
  check_finite_loss(loss, 0);
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  EarlyStop stop(p);
  Eigen::VectorXd new_grad(theta.size());
  for (int it = 0; it < p.epochs; ++it) {
    if (grad.lpNorm<Eigen::Infinity>() < 1e-12) break;
    // Two-loop recursion.
    Eigen::VectorXd q = grad;
    std::vector<double> a(s_hist.size());
    for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
      a[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= a[k] * y_hist[k];
    }
    if (!s_hist.empty()) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      q /= std::max(1.0, grad.norm());
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double b = rho_hist[k] * y_hist[k].dot(q);
      q += (a[k] - b) * s_hist[k];
    }
    Eigen::VectorXd dir = -q;
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      dir = -grad;
      slope = -grad.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }
    // Armijo backtracking.
    double t = 1.0;
    double new_loss = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      unflatten(m, theta + t * dir);
      new_loss = mlp_loss(m, X, y, p.alpha, &new_grad);
      if (std::isfinite(new_loss) && new_loss <= loss + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      unflatten(m, theta);
      break;
    }
    const Eigen::VectorXd s = t * dir;
    const Eigen::VectorXd yv = new_grad - grad;
    theta += s;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * yv.squaredNorm()) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > p.lbfgs_history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    grad = new_grad;
    loss = new_loss;
    m.loss_history.push_back(loss);
    if (stop.update(loss)) break;
  }
  unflatten(m, theta);
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kLogistic: return "logistic";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
  }
  return "?";
}

Activation parse_activation(std::string_view s) {
  if (s == "logistic") return Activation::kLogistic;
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  throw Error(ErrorCode::kInvalidSpec, "unknown activation '" + std::string(s) + "'");
}

std::string_view to_string(MlpSolver s) {
  switch (s) {
    case MlpSolver::kAdam: return "adam";
    case MlpSolver::kSgd: return "sgd";
    case MlpSolver::kLbfgs: return "lbfgs";
  }
  return "?";
}

MlpSolver parse_mlp_solver(std::string_view s) {
  if (s == "adam") return MlpSolver::kAdam;
  if (s == "sgd") return MlpSolver::kSgd;
  if (s == "lbfgs") return MlpSolver::kLbfgs;
  throw Error(ErrorCode::kInvalidSpec, "unknown MLP solver '" + std::string(s) + "'");
}

Eigen::VectorXd MlpModel::predict(const Eigen::MatrixXd& X) const {
  require(X.cols() == inputs(), ErrorCode::kShapeMismatch, "MLP feature count mismatch");
  Eigen::MatrixXd a = X;
  const std::size_t L = weights.size();
  for (std::size_t l = 0; l < L; ++l) {
    Eigen::MatrixXd z = a * weights[l].transpose();
    z.rowwise() += biases[l].transpose();
    if (l + 1 < L) activate(activation, z);
    a = std::move(z);
  }
  return a.col(0);
}

double MlpModel::weight_norm2() const {
  double s = 0.0;
  for (const auto& w : weights) s += w.squaredNorm();
  return s;
}

MlpModel init_mlp(int inputs, const MlpParams& params, std::uint64_t seed) {
  require(inputs > 0, ErrorCode::kEmptyInput, "MLP needs at least one input");
  require(!params.hidden.empty() && params.hidden.size() <= 3, ErrorCode::kInvalidSpec,
          "MLP needs 1 to 3 hidden layers");
  MlpModel m;
  m.activation = params.activation;
  Rng rng(derive_seed(seed, 0));
  std::vector<int> sizes{inputs};
  for (int h : params.hidden) {
    require(h > 0, ErrorCode::kInvalidSpec, "hidden layer width must be positive");
    sizes.push_back(h);
  }
  sizes.push_back(1);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(fan_out, fan_in);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(fan_out);
    if (!params.zero_init) {
      const double factor = params.activation == Activation::kLogistic ? 2.0 : 6.0;
      const double bound = std::sqrt(factor / (fan_in + fan_out));
      for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = rng.uniform(-bound, bound);
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-bound, bound);
    }
    m.weights.push_back(std::move(W));
    m.biases.push_back(std::move(b));
  }
  return m;
}

Eigen::VectorXd flatten(const MlpModel& m) {
  Eigen::Index dim = 0;
  for (std::size_t l = 0; l < m.weights.size(); ++l) dim += m.weights[l].size() + m.biases[l].size();
  Eigen::VectorXd theta(dim);
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    theta.segment(k, m.weights[l].size()) = m.weights[l].reshaped();
    k += m.weights[l].size();
    theta.segment(k, m.biases[l].size()) = m.biases[l];
    k += m.biases[l].size();
  }
  return theta;
}

void unflatten(MlpModel& m, const Eigen::VectorXd& theta) {
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    auto& W = m.weights[l];
    W.reshaped() = theta.segment(k, W.size());
    k += W.size();
    m.biases[l] = theta.segment(k, m.biases[l].size());
    k += m.biases[l].size();
  }
  require(k == theta.size(), ErrorCode::kShapeMismatch, "parameter vector length mismatch");
}

double mlp_loss(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                double alpha, Eigen::VectorXd* grad) {
  const std::size_t L = m.weights.size();
  const double n = static_cast<double>(X.rows());
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(L + 1);
  acts.push_back(X);
  for (std::size_t l = 0; l < L; ++l) {
    Eigen::MatrixXd z = acts.back() * m.weights[l].transpose();
    z.rowwise() += m.biases[l].transpose();
    if (l + 1 < L) activate(m.activation, z);
    acts.push_back(std::move(z));
  }
  const Eigen::VectorXd err = acts.back().col(0) - y;
  const double loss = 0.5 * err.squaredNorm() / n + 0.5 * alpha * m.weight_norm2() / n;
  if (grad == nullptr) return loss;

  std::vector<Eigen::MatrixXd> gW(L);
  std::vector<Eigen::VectorXd> gb(L);
  Eigen::MatrixXd delta = err / n;  // n x 1
  for (std::size_t l = L; l-- > 0;) {
    gW[l] = delta.transpose() * acts[l] + (alpha / n) * m.weights[l];
    gb[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      delta = ((delta * m.weights[l]).array() * derivative(m.activation, acts[l])).matrix();
    }
  }
  Eigen::Index k = 0;
  grad->resize(flatten(m).size());
  for (std::size_t l = 0; l < L; ++l) {
    grad->segment(k, gW[l].size()) = gW[l].reshaped();
    k += gW[l].size();
    grad->segment(k, gb[l].size()) = gb[l];
    k += gb[l].size();
  }
  return loss;
}

MlpModel fit_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const MlpParams& params,
                 std::uint64_t seed) {
  require(X.rows() > 0 && X.cols() > 0, ErrorCode::kEmptyInput, "MLP needs data");
  require(X.rows() == y.size(), ErrorCode::kShapeMismatch, "X rows and y length differ");
  require(X.allFinite() && y.allFinite(), ErrorCode::kInvalidArgument,
          "MLP inputs must be finite");
  require(params.alpha >= 0.0, ErrorCode::kInvalidSpec, "alpha must be >= 0");
  require(params.epochs >= 0, ErrorCode::kInvalidSpec, "epochs must be >= 0");
  MlpModel m = init_mlp(static_cast<int>(X.cols()), params, seed);
  if (params.solver == MlpSolver::kLbfgs) {
    train_lbfgs(m, X, y, params);
  } else {
    train_first_order(m, X, y, params, seed);
  }
  return m;
}

}  // namespace fcpred::ml
