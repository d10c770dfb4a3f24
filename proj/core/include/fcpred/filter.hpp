#pragma once

#include <complex>
#include <span>
#include <vector>

namespace fcpred {

// One second-order section in direct form II transposed, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

// Cascade of biquads. Designed filters are stored this way rather than as a
// single transfer-function polynomial; a 0.1 Hz edge at 256 Hz puts poles too
// close to z = 1 for the expanded polynomial to be accurate.
class SosFilter {
 public:
  SosFilter() = default;
  explicit SosFilter(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

  const std::vector<Biquad>& sections() const { return sections_; }
  int order() const { return 2 * static_cast<int>(sections_.size()); }

  // Complex frequency response at f_hz for sampling rate rate_hz.
  std::complex<double> response(double f_hz, double rate_hz) const;

  // Causal filtering. State is initialized to the step-response steady state
  // scaled by the first sample, so a constant input produces no start-up
  // transient.
  std::vector<double> filter(std::span<const double> x) const;

  // Forward-backward filtering with odd reflection padding of pad samples at
  // each end (clamped to length-1). Zero phase, magnitude |H|^2.
  std::vector<double> filtfilt(std::span<const double> x, int pad) const;

 private:
  std::vector<Biquad> sections_;
};

// Butterworth bandpass: analog prototype of the given order, bandpass
// transform, bilinear transform with prewarped edges. The result has 2*order
// poles (order biquads) and unit gain at the prewarped geometric centre.
SosFilter design_butterworth_bandpass(double low_hz, double high_hz, double rate_hz,
                                      int order);

// Second-order IIR notch with -3 dB bandwidth bandwidth_hz.
SosFilter design_notch(double center_hz, double bandwidth_hz, double rate_hz);

}  // namespace fcpred
