#include "fcpred/signal.hpp"

#include <cmath>
#include <sstream>

#include "fcpred/error.hpp"

namespace fcpred {

FilterSpec FilterSpec::bandpass(double low_hz, double high_hz, int order,
                                bool zero_phase) {
  FilterSpec s;
  s.kind = Kind::kBandpass;
  s.low_hz = low_hz;
  s.high_hz = high_hz;
  s.order = order;
  s.zero_phase = zero_phase;
  return s;
}

FilterSpec FilterSpec::notch(double center_hz, double bandwidth_hz, bool zero_phase) {
  FilterSpec s;
  s.kind = Kind::kNotch;
  s.center_hz = center_hz;
  s.bandwidth_hz = bandwidth_hz;
  s.order = 2;
  s.zero_phase = zero_phase;
  return s;
}

void FilterSpec::validate(double rate_hz) const {
  const double nyquist = rate_hz / 2.0;
  std::ostringstream msg;
  if (kind == Kind::kBandpass) {
    if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < nyquist)) {
      msg << "bandpass " << low_hz << "-" << high_hz << " Hz requires 0 < low < high < "
          << nyquist << " Hz (nyquist at " << rate_hz << " Hz)";
      throw Error(ErrorCode::kInvalidSpec, msg.str());
    }
    if (order < 1 || order > 12) {
      throw Error(ErrorCode::kInvalidSpec, "bandpass order must be in [1, 12]");
    }
  } else {
    if (!(center_hz > 0.0 && center_hz < nyquist)) {
      msg << "notch centre " << center_hz << " Hz must lie in (0, " << nyquist << ")";
      throw Error(ErrorCode::kInvalidSpec, msg.str());
    }
    if (!(bandwidth_hz > 0.0 && bandwidth_hz < nyquist)) {
      throw Error(ErrorCode::kInvalidSpec, "notch bandwidth must be positive");
    }
  }
}

SosFilter FilterSpec::design(double rate_hz) const {
  validate(rate_hz);
  if (kind == Kind::kBandpass) {
    return design_butterworth_bandpass(low_hz, high_hz, rate_hz, order);
  }
  return design_notch(center_hz, bandwidth_hz, rate_hz);
}

MultichannelRecording apply_filter(const MultichannelRecording& rec,
                                   const FilterSpec& spec) {
  const SosFilter filter = spec.design(rec.rate_hz());
  const int pad = 3 * filter.order();
  Eigen::MatrixXd out(rec.channels(), rec.length());
  std::vector<double> row(static_cast<std::size_t>(rec.length()));
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    for (Eigen::Index t = 0; t < rec.length(); ++t) row[t] = rec.samples()(c, t);
    const std::vector<double> y =
        spec.zero_phase ? filter.filtfilt(row, pad) : filter.filter(row);
    for (Eigen::Index t = 0; t < rec.length(); ++t) out(c, t) = y[t];
  }
  require(out.allFinite(), ErrorCode::kDegenerate, "filter produced non-finite output");
  return rec.with_samples(std::move(out));
}

MultichannelRecording rereference(const MultichannelRecording& rec,
                                  const std::vector<std::string>& ref_labels) {
  require(!ref_labels.empty(), ErrorCode::kInvalidArgument,
          "rereference needs at least one reference channel");
  Eigen::RowVectorXd ref = Eigen::RowVectorXd::Zero(rec.length());
  for (const auto& label : ref_labels) {
    const Eigen::Index idx = rec.find_channel(label);
    require(idx >= 0, ErrorCode::kMissingChannel,
            "reference channel '" + label + "' not in recording");
    ref += rec.samples().row(idx);
  }
  ref /= static_cast<double>(ref_labels.size());
  Eigen::MatrixXd out = rec.samples().rowwise() - ref;
  return rec.with_samples(std::move(out));
}

MultichannelRecording baseline_correct(const MultichannelRecording& rec,
                                       const MultichannelRecording& baseline) {
  require(baseline.labels() == rec.labels(), ErrorCode::kLabelMismatch,
          "baseline channel labels differ from recording labels");
  const Eigen::VectorXd means = baseline.samples().rowwise().mean();
  Eigen::MatrixXd out = rec.samples().colwise() - means;
  return rec.with_samples(std::move(out));
}

MultichannelRecording extract_epoch(const MultichannelRecording& rec, double start_s,
                                    double end_s) {
  const double duration = rec.duration_s();
  // Half-sample slack absorbs rounding in start/end computed from rates.
  const double slack = 0.5 / rec.rate_hz();
  if (!(start_s >= 0.0 && start_s < end_s && end_s <= duration + slack)) {
    std::ostringstream msg;
    msg << "epoch [" << start_s << ", " << end_s << ") outside [0, " << duration << "]";
    throw Error(ErrorCode::kRange, msg.str());
  }
  const auto i0 = static_cast<Eigen::Index>(std::llround(start_s * rec.rate_hz()));
  const auto i1 = std::min<Eigen::Index>(
      static_cast<Eigen::Index>(std::llround(end_s * rec.rate_hz())), rec.length());
  require(i1 > i0, ErrorCode::kRange, "epoch contains no samples");
  return rec.with_samples(rec.samples().middleCols(i0, i1 - i0));
}

}  // namespace fcpred
