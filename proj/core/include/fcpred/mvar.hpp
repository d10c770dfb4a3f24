#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fcpred/connectivity.hpp"
#include "fcpred/recording.hpp"

namespace fcpred {

// x_t = sum_k A_k x_{t-k} + e_t,  cov(e) = noise_cov.
struct MvarModel {
  std::vector<Eigen::MatrixXd> coeffs;  // A_1 .. A_p, each R x R
  Eigen::MatrixXd noise_cov;
  double rate_hz = 1.0;
  std::vector<std::string> labels;
  // Spectral radius of the companion matrix; < 1 means stable.
  double spectral_radius = 0.0;

  int order() const { return static_cast<int>(coeffs.size()); }
  Eigen::Index channels() const { return coeffs.empty() ? 0 : coeffs.front().rows(); }
  bool stable() const { return spectral_radius < 1.0; }
};

double companion_spectral_radius(const std::vector<Eigen::MatrixXd>& coeffs);

// Validates shapes, symmetry and PSD-ness of noise_cov and fills
// spectral_radius. Empty labels get defaults.
MvarModel make_mvar_model(std::vector<Eigen::MatrixXd> coeffs, Eigen::MatrixXd noise_cov,
                          double rate_hz, std::vector<std::string> labels = {});

// Ordinary least squares on stacked lag regressors (no intercept), solved by
// column-pivoted QR. noise_cov is the residual covariance E'E / (T - p).
MvarModel fit_mvar(const MultichannelRecording& series, int order);

enum class OrderCriterion { kAic, kBic };

// Criterion value for p = 1..max_p, each fitted on the same T - max_p
// equations so the values are comparable.
std::vector<double> order_criteria(const MultichannelRecording& series, int max_p,
                                   OrderCriterion criterion);
// argmin of order_criteria; ties go to the smaller order.
int select_order(const MultichannelRecording& series, int max_p,
                 OrderCriterion criterion);

struct SpectralTransfer {
  std::vector<double> freqs_hz;
  std::vector<Eigen::MatrixXcd> H;
};

// H(f) = (I - sum_k A_k exp(-i 2 pi f k / rate))^-1
SpectralTransfer transfer_function(const MvarModel& model, std::span<const double> freqs_hz);

// Per-frequency normalized DTF: gamma2(a, b) = |H_ab|^2 / sum_m |H_am|^2.
std::vector<Eigen::MatrixXd> dtf_spectrum(const MvarModel& model,
                                          std::span<const double> freqs_hz);

// Mean of the per-frequency DTF over the grid frequencies inside band
// (inclusive).
ConnectivityMatrix dtf(const MvarModel& model, std::span<const double> freqs_hz,
                       std::pair<double, double> band);

// Evenly spaced grid lo, lo+step, ..., <= hi.
std::vector<double> frequency_grid(double lo_hz = 1.0, double hi_hz = 45.0,
                                   double step_hz = 0.5);

// Canonical EEG bands: delta, theta, alpha, beta, gamma, broadband.
std::pair<double, double> named_band(const std::string& name);

}  // namespace fcpred
