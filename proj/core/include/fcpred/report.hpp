#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fcpred/selection.hpp"

namespace fcpred {

// Column headings of the results table, left to right.
const std::vector<std::string>& report_columns();

struct ReportRow {
  std::string model;            // display name of the family
  std::string hyperparameters;  // "alpha = 0.00126, fit intercept = False, ..."
  double train_rmse = 0.0;      // mean over CV training folds
  double test_rmse = 0.0;       // mean over CV held-out folds
};

ReportRow report_row(const CvReport& report);

// Markdown table, one row per report, followed by held-out test scores when
// any report carries them. feature_label names the connectivity input, e.g.
// "directed transfer function (DTF)".
std::string render_markdown(const std::vector<CvReport>& reports, std::string_view feature_label);

}  // namespace fcpred
