#include "fcpred/features.hpp"

#include <cmath>

#include "fcpred/error.hpp"

namespace fcpred {

double targeting_rmse(const TrackingTrace& trace) {
  require(trace.cursor.size() == trace.target.size(), ErrorCode::kShapeMismatch,
          "cursor and target traces differ in length");
  require(!trace.cursor.empty(), ErrorCode::kEmptyInput, "tracking trace is empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < trace.cursor.size(); ++i) {
    const double dx = trace.cursor[i].first - trace.target[i].first;
    const double dy = trace.cursor[i].second - trace.target[i].second;
    acc += dx * dx + dy * dy;
  }
  return std::sqrt(acc / static_cast<double>(trace.cursor.size()));
}

std::string_view to_string(DiffMode mode) {
  return mode == DiffMode::kAbsolute ? "absolute" : "signed";
}

DiffMode parse_diff_mode(std::string_view s) {
  if (s == "absolute") return DiffMode::kAbsolute;
  if (s == "signed") return DiffMode::kSigned;
  throw Error(ErrorCode::kInvalidSpec, "unknown feature mode '" + std::string(s) + "'");
}

FeatureMeta FeatureMeta::for_matrix(Metric metric, std::vector<std::string> roi_labels,
                                    DiffMode mode) {
  FeatureMeta meta;
  meta.metric = metric;
  meta.mode = mode;
  const int r = static_cast<int>(roi_labels.size());
  meta.roi_labels = std::move(roi_labels);
  for (int a = 0; a < r; ++a) {
    for (int b = metric == Metric::kDtf ? 0 : a + 1; b < r; ++b) {
      meta.index_map.emplace_back(a, b);
    }
  }
  return meta;
}

int FeatureMeta::feature_index(int row, int col) const {
  const int r = static_cast<int>(roi_labels.size());
  if (row < 0 || col < 0 || row >= r || col >= r) return -1;
  if (metric == Metric::kDtf) return row * r + col;
  if (row >= col) return -1;
  // Entries before row `row` in the strict upper triangle, then the offset.
  return row * (2 * r - row - 1) / 2 + (col - row - 1);
}

FeatureVector diff_features(const ConnectivityMatrix& day1, const ConnectivityMatrix& day10,
                            DiffMode mode) {
  require(day1.metric == day10.metric, ErrorCode::kShapeMismatch,
          "cannot difference matrices of different metrics");
  require(day1.values.rows() == day10.values.rows() &&
              day1.values.cols() == day10.values.cols() && day1.values.rows() == day1.values.cols(),
          ErrorCode::kShapeMismatch, "connectivity matrices differ in shape");
  require(day1.roi_labels == day10.roi_labels, ErrorCode::kLabelMismatch,
          "connectivity matrices carry different ROI labels");

  FeatureVector fv;
  fv.meta = FeatureMeta::for_matrix(day1.metric, day1.roi_labels, mode);
  fv.values.resize(static_cast<Eigen::Index>(fv.meta.size()));
  for (std::size_t i = 0; i < fv.meta.size(); ++i) {
    const auto [a, b] = fv.meta.index_map[i];
    const double d = day10.values(a, b) - day1.values(a, b);
    fv.values(static_cast<Eigen::Index>(i)) = mode == DiffMode::kAbsolute ? std::abs(d) : d;
  }
  return fv;
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.meta = meta;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    out.y(static_cast<Eigen::Index>(i)) = y(rows[i]);
    if (!subject_ids.empty()) out.subject_ids.push_back(subject_ids[rows[i]]);
  }
  return out;
}

void Dataset::validate() const {
  require(X.rows() == y.size() && static_cast<std::size_t>(X.rows()) == subject_ids.size(),
          ErrorCode::kShapeMismatch, "dataset rows, targets and subject ids disagree");
  require(static_cast<std::size_t>(X.cols()) == meta.size(), ErrorCode::kShapeMismatch,
          "dataset feature count does not match its feature metadata");
  require(X.allFinite() && y.allFinite(), ErrorCode::kInvalidArgument,
          "dataset contains NaN or infinite values");
}

Dataset assemble_dataset(const std::vector<SubjectSessions>& subjects, DiffMode mode) {
  require(subjects.size() >= 2, ErrorCode::kInsufficientSamples,
          "a dataset needs at least two subjects");
  Dataset data;
  const FeatureVector first =
      diff_features(subjects.front().day1, subjects.front().day10, mode);
  data.meta = first.meta;
  data.X.resize(static_cast<Eigen::Index>(subjects.size()), first.values.size());
  data.y.resize(static_cast<Eigen::Index>(subjects.size()));
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const auto& s = subjects[i];
    require(std::isfinite(s.target), ErrorCode::kInvalidArgument,
            "subject '" + s.subject_id + "' has a non-finite target");
    require(s.day1.metric == data.meta.metric && s.day1.roi_labels == data.meta.roi_labels,
            ErrorCode::kShapeMismatch,
            "subject '" + s.subject_id + "' has inconsistent metric or ROI layout");
    const FeatureVector fv = diff_features(s.day1, s.day10, mode);
    data.X.row(static_cast<Eigen::Index>(i)) = fv.values.transpose();
    data.y(static_cast<Eigen::Index>(i)) = s.target;
    data.subject_ids.push_back(s.subject_id);
  }
  data.validate();
  return data;
}

}  // namespace fcpred
