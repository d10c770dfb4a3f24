#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "fcpred/features.hpp"
#include "fcpred/pipeline/config.hpp"
#include "fcpred/pipeline/manifest.hpp"

namespace fcpred::pipeline {

// Run directory layout, relative to PipelineConfig::out:
//   synth/        sessions.csv or matrices.csv, targets.csv, planted.json
//   preprocessed/ sessions.csv, recordings/
//   connect/      matrices.csv, matrices/, models.csv
//   features/     dataset.csv (+ .json sidecar)
//   train/        cv_<family>.json, model_<family>.json, report.md, summary.json
//   explain/      shap.json, shap_summary.csv, shap_points.csv
//   report/       report.md
// Every stage directory also holds manifest.json and timings.json.
//
// Each command checks its whole configuration and the presence of its
// inputs before it takes the run lock or writes anything. Progress and
// warnings go to log.

RunManifest cmd_synth(const PipelineConfig& c, std::ostream& log);
RunManifest cmd_preprocess(const PipelineConfig& c, std::ostream& log);
RunManifest cmd_connect(const PipelineConfig& c, std::ostream& log);
RunManifest cmd_features(const PipelineConfig& c, std::ostream& log);
RunManifest cmd_train(const PipelineConfig& c, std::ostream& log);
RunManifest cmd_explain(const PipelineConfig& c, std::ostream& log);
// Renders the given CvReport JSON files, or train/cv_*.json when empty.
RunManifest cmd_report(const PipelineConfig& c, const std::vector<fs::path>& cv_reports,
                       std::ostream& log);

std::string config_hash(const PipelineConfig& c);

// CSV with header subject_id,day1,day10; relative paths resolve against the
// CSV's directory.
struct SessionRow {
  std::string subject_id;
  fs::path day1;
  fs::path day10;
};
std::vector<SessionRow> read_sessions(const fs::path& csv);

// CSV with subject_id and either a target column or a trace column naming a
// tracking CSV (scored with targeting_rmse).
std::map<std::string, double> read_targets(const fs::path& csv);

// "directed transfer function (DTF)" / "phase lag index (PLI)".
std::string feature_label(Metric m);

}  // namespace fcpred::pipeline
