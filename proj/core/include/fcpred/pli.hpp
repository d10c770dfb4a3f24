#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "fcpred/connectivity.hpp"
#include "fcpred/recording.hpp"

namespace fcpred {

// Instantaneous phase per channel, wrapped to (-pi, pi].
struct PhaseSeries {
  Eigen::MatrixXd phases;
  double rate_hz = 1.0;
};

// Analytic signal x + i*Hilbert(x), built in the frequency domain (negative
// frequencies zeroed, positive doubled).
Eigen::VectorXcd analytic_signal(std::span<const double> x);

PhaseSeries analytic_phase(const MultichannelRecording& series);

// Wraps an angle to (-pi, pi].
double wrap_phase(double x);

// sign of a wrapped phase difference, with 0 and +-pi both contributing 0.
int phase_sign(double wrapped_difference);

struct PliOptions {
  // Fraction of samples discarded at each end before averaging signs.
  double edge_trim = 0.1;
};

// |mean_t sign(phi_a(t) - phi_b(t))| per unordered pair; zero diagonal.
ConnectivityMatrix pli_matrix(const MultichannelRecording& series,
                              const PliOptions& options = {});
ConnectivityMatrix pli_from_phases(const PhaseSeries& phases,
                                   const std::vector<std::string>& labels,
                                   const PliOptions& options = {});

}  // namespace fcpred
