#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace fcpred {

// Channel-labelled sample matrix (channels x time, microvolts) with its
// sampling rate. Construction validates the invariants: one unique label per
// channel, positive rate, at least one sample, every value finite.
class MultichannelRecording {
 public:
  using Meta = std::map<std::string, std::string>;

  MultichannelRecording(Eigen::MatrixXd samples, double rate_hz,
                        std::vector<std::string> labels, Meta meta = {});

  const Eigen::MatrixXd& samples() const { return samples_; }
  double rate_hz() const { return rate_hz_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Meta& meta() const { return meta_; }
  Meta& meta() { return meta_; }

  Eigen::Index channels() const { return samples_.rows(); }
  Eigen::Index length() const { return samples_.cols(); }
  double duration_s() const { return static_cast<double>(length()) / rate_hz_; }

  // Index of a channel label, or -1.
  Eigen::Index find_channel(const std::string& label) const;

  // Returns a recording with the same labels/rate/meta and new samples.
  MultichannelRecording with_samples(Eigen::MatrixXd samples) const;

 private:
  Eigen::MatrixXd samples_;
  double rate_hz_;
  std::vector<std::string> labels_;
  Meta meta_;
};

// Default labels "ch0", "ch1", ...
std::vector<std::string> default_labels(Eigen::Index channels);

}  // namespace fcpred
