#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fcpred/connectivity.hpp"

namespace fcpred {

// Cursor and target screen coordinates sampled together.
struct TrackingTrace {
  std::vector<std::pair<double, double>> cursor;
  std::vector<std::pair<double, double>> target;
};

// Root mean squared Euclidean cursor-to-target distance.
double targeting_rmse(const TrackingTrace& trace);

enum class DiffMode { kAbsolute, kSigned };

std::string_view to_string(DiffMode mode);
DiffMode parse_diff_mode(std::string_view s);

// Feature index -> (row ROI, column ROI). DTF keeps the full R x R grid in
// row-major order (index a*R + b); PLI keeps the strict upper triangle in
// row-major order.
struct FeatureMeta {
  Metric metric = Metric::kDtf;
  DiffMode mode = DiffMode::kAbsolute;
  std::vector<std::string> roi_labels;
  std::vector<std::pair<int, int>> index_map;

  static FeatureMeta for_matrix(Metric metric, std::vector<std::string> roi_labels,
                                DiffMode mode = DiffMode::kAbsolute);
  std::size_t size() const { return index_map.size(); }
  // Inverse of index_map; -1 for positions that are not features.
  int feature_index(int row, int col) const;
};

struct FeatureVector {
  Eigen::VectorXd values;
  FeatureMeta meta;
};

// Elementwise |day10 - day1| (or day10 - day1 in signed mode), flattened.
FeatureVector diff_features(const ConnectivityMatrix& day1, const ConnectivityMatrix& day10,
                            DiffMode mode = DiffMode::kAbsolute);

struct Dataset {
  Eigen::MatrixXd X;  // subjects x features
  Eigen::VectorXd y;
  std::vector<std::string> subject_ids;
  FeatureMeta meta;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index features() const { return X.cols(); }
  // Row subset in the given order.
  Dataset subset(const std::vector<int>& rows) const;
  void validate() const;
};

struct SubjectSessions {
  std::string subject_id;
  ConnectivityMatrix day1;
  ConnectivityMatrix day10;
  double target = 0.0;
};

Dataset assemble_dataset(const std::vector<SubjectSessions>& subjects,
                         DiffMode mode = DiffMode::kAbsolute);

// CSV: subject_id, one column per feature index (header = index), target.
// The JSON sidecar holds the FeatureMeta.
void write_dataset(const Dataset& data, const std::filesystem::path& csv_path);
Dataset read_dataset(const std::filesystem::path& csv_path);

nlohmann::json to_json(const FeatureMeta& meta);
FeatureMeta feature_meta_from_json(const nlohmann::json& j);

// CSV with columns cursor_x, cursor_y, target_x, target_y.
TrackingTrace read_tracking_trace(const std::filesystem::path& path);

}  // namespace fcpred
