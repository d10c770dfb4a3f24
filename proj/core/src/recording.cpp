#include "fcpred/recording.hpp"

#include <set>

#include "fcpred/error.hpp"

namespace fcpred {

MultichannelRecording::MultichannelRecording(Eigen::MatrixXd samples,
                                             double rate_hz,
                                             std::vector<std::string> labels,
                                             Meta meta)
    : samples_(std::move(samples)),
      rate_hz_(rate_hz),
      labels_(std::move(labels)),
      meta_(std::move(meta)) {
  require(samples_.rows() > 0 && samples_.cols() > 0, ErrorCode::kEmptyInput,
          "recording must have at least one channel and one sample");
  require(rate_hz_ > 0.0 && std::isfinite(rate_hz_), ErrorCode::kInvalidArgument,
          "sampling rate must be positive");
  require(static_cast<Eigen::Index>(labels_.size()) == samples_.rows(),
          ErrorCode::kLabelMismatch,
          "label count " + std::to_string(labels_.size()) +
              " does not match channel count " +
              std::to_string(samples_.rows()));
  std::set<std::string> unique(labels_.begin(), labels_.end());
  require(unique.size() == labels_.size(), ErrorCode::kLabelMismatch,
          "channel labels must be unique");
  require(samples_.allFinite(), ErrorCode::kInvalidArgument,
          "recording contains non-finite samples");
}

Eigen::Index MultichannelRecording::find_channel(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return static_cast<Eigen::Index>(i);
  }
  return -1;
}

MultichannelRecording MultichannelRecording::with_samples(
    Eigen::MatrixXd samples) const {
  return MultichannelRecording(std::move(samples), rate_hz_, labels_, meta_);
}

std::vector<std::string> default_labels(Eigen::Index channels) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(channels));
  for (Eigen::Index i = 0; i < channels; ++i) out.push_back("ch" + std::to_string(i));
  return out;
}

}  // namespace fcpred
