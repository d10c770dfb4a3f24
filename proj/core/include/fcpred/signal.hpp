#pragma once

#include <string>
#include <vector>

#include "fcpred/filter.hpp"
#include "fcpred/recording.hpp"

namespace fcpred {

struct FilterSpec {
  enum class Kind { kBandpass, kNotch };

  Kind kind = Kind::kBandpass;
  double low_hz = 0.1;
  double high_hz = 45.0;
  double center_hz = 50.0;
  double bandwidth_hz = 2.0;
  // Butterworth prototype order for bandpass; notches are always second order.
  int order = 4;
  bool zero_phase = true;

  static FilterSpec bandpass(double low_hz, double high_hz, int order = 4,
                             bool zero_phase = true);
  static FilterSpec notch(double center_hz, double bandwidth_hz, bool zero_phase = true);

  // Throws kInvalidSpec if the spec is not realizable at rate_hz.
  void validate(double rate_hz) const;
  SosFilter design(double rate_hz) const;
};

// Filters every channel. Zero-phase specs run forward-backward with odd
// reflection padding of 3x the filter order.
MultichannelRecording apply_filter(const MultichannelRecording& rec,
                                   const FilterSpec& spec);

// Subtracts, per time point, the mean of the reference channels from every
// channel (reference channels included).
MultichannelRecording rereference(const MultichannelRecording& rec,
                                  const std::vector<std::string>& ref_labels);

// Subtracts each channel's temporal mean over the baseline recording. The
// baseline must carry the same labels in the same order.
MultichannelRecording baseline_correct(const MultichannelRecording& rec,
                                       const MultichannelRecording& baseline);

// Samples in [round(start_s*rate), round(end_s*rate)).
MultichannelRecording extract_epoch(const MultichannelRecording& rec, double start_s,
                                    double end_s);

}  // namespace fcpred
