#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string_view>
#include <vector>

namespace fcpred::ml {

enum class Activation { kLogistic, kTanh, kRelu };
enum class MlpSolver { kAdam, kSgd, kLbfgs };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);
std::string_view to_string(MlpSolver s);
MlpSolver parse_mlp_solver(std::string_view s);

struct MlpParams {
  std::vector<int> hidden{50};
  Activation activation = Activation::kRelu;
  MlpSolver solver = MlpSolver::kAdam;
  double alpha = 1e-4;
  int epochs = 2000;
  int batch_size = 8;  // sgd/adam; lbfgs is always full batch
  double learning_rate = 1e-3;
  double momentum = 0.9;  // sgd, Nesterov
  int lbfgs_history = 10;
  // Stop once the training loss has failed to improve by tol for
  // n_iter_no_change consecutive epochs.
  double tol = 1e-8;
  int n_iter_no_change = 50;
  bool zero_init = false;
};

struct MlpModel {
  Activation activation = Activation::kRelu;
  // weights[l] maps layer l to layer l+1, shape (out, in); the last layer is
  // the linear output unit.
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::vector<double> loss_history;

  int inputs() const { return static_cast<int>(weights.front().cols()); }
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  double weight_norm2() const;  // sum of squared weights, biases excluded
};

MlpModel init_mlp(int inputs, const MlpParams& params, std::uint64_t seed);

Eigen::VectorXd flatten(const MlpModel& m);
void unflatten(MlpModel& m, const Eigen::VectorXd& theta);

// (1/2n) sum (yhat - y)^2 + (alpha/2n) sum ||W||^2. Fills grad (same layout
// as flatten) when non-null.
double mlp_loss(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                double alpha, Eigen::VectorXd* grad);

// Throws kDiverged if the loss becomes non-finite.
MlpModel fit_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const MlpParams& params,
                 std::uint64_t seed);

}  // namespace fcpred::ml
