#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fcpred/connectivity.hpp"
#include "fcpred/features.hpp"
#include "fcpred/mvar.hpp"
#include "fcpred/recording.hpp"

namespace fcpred {

struct PlantedMvar {
  std::vector<Eigen::MatrixXd> coeffs;
  Eigen::MatrixXd noise_cov;
  double rate_hz = 128.0;
  std::uint64_t seed = 0;
  std::vector<std::string> labels;

  // Validated model with its spectral radius filled in.
  MvarModel model() const;
};

// Gaussian coefficients rescaled so the companion spectral radius equals
// radius; identity noise covariance.
PlantedMvar random_stable_mvar(int channels, int order, std::uint64_t seed, double radius = 0.9,
                               double rate_hz = 128.0);

// Channel 0 drives channel 1 at lag 1 with weight coupling; both channels
// have autoregressive weight self_weight.
PlantedMvar unidirectional_pair(double coupling, double self_weight = 0.5,
                                double rate_hz = 128.0, std::uint64_t seed = 0);

// Burn-in of 100 * order samples is simulated and discarded. Throws
// kUnstable for an unstable system.
MultichannelRecording gen_mvar_signal(const PlantedMvar& planted, long n_samples);

// DTF of the planted coefficients, the reference for estimated DTF.
ConnectivityMatrix analytic_dtf(const PlantedMvar& planted, std::span<const double> freqs_hz,
                                std::pair<double, double> band);

// Two channels: sin(2 pi f t + phi0) and sin(2 pi f t + phi0 - lag), each
// plus independent Gaussian noise. snr is a power ratio (sinusoid power 1/2
// over noise variance); infinity means noiseless, 0 means noise only.
MultichannelRecording gen_phase_locked(double freq_hz, double lag_rad, double snr, long n_samples,
                                       double rate_hz, std::uint64_t seed);

// Independent white Gaussian sources observed through a random real mixing
// matrix (no delays).
MultichannelRecording gen_mixed_sources(int sources, int channels, long n_samples, double rate_hz,
                                        std::uint64_t seed);

struct PlantedCohort {
  int n_subjects = 40;
  int rois = 8;
  Metric metric = Metric::kDtf;
  // (row, col) positions that change between sessions, and the mean change
  // at each. For PLI the mirrored entry changes too.
  std::vector<std::pair<int, int>> informative;
  std::vector<double> effects;
  // Std of the session-to-session change at every entry.
  double noise = 0.01;
  double target_offset = 20.0;
  double target_gain = 50.0;
  double target_noise = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Cohort {
  std::vector<SubjectSessions> subjects;
  // Per-subject multiplier u_s ~ U(0, 2) applied to every planted effect.
  std::vector<double> responsiveness;
};

// day10 = day1 + noise + u_s * effect at each informative position (DTF rows
// stay stochastic: the rest of the row gives up the effect evenly), and
// target = offset - gain * sum_j u_s * effect_j + N(0, target_noise^2).
Cohort gen_cohort(const PlantedCohort& planted);

struct RecordingCohortSpec {
  int n_subjects = 12;
  int channels = 4;
  int order = 2;
  long n_samples = 2048;
  double rate_hz = 128.0;
  // Lag-1 coupling added on day 10, scaled per subject as in gen_cohort.
  std::vector<std::pair<int, int>> informative{{1, 0}};
  std::vector<double> effects{0.3};
  double target_offset = 20.0;
  double target_gain = 5.0;
  double target_noise = 0.1;
  std::uint64_t seed = 0;
};

struct RecordingSubject {
  std::string id;
  MultichannelRecording day1;
  MultichannelRecording day10;
  double target = 0.0;
};

// Raw two-session recordings for the whole preprocessing-to-attribution
// pipeline.
std::vector<RecordingSubject> gen_recording_cohort(const RecordingCohortSpec& spec);

std::vector<std::string> roi_labels(int count);

}  // namespace fcpred
