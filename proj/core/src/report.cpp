#include "fcpred/report.hpp"

#include <cstdio>
#include <sstream>

#include "fcpred/error.hpp"

namespace fcpred {
namespace {

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{
      "Machine learning model", "Optimal hyperparameters",
      "Train RMSE (average Cross-validation score)",
      "Test RMSE (average Cross-validation score)"};
  return cols;
}

ReportRow report_row(const CvReport& report) {
  const ConfigResult& best = report.best_config();
  return {std::string(ml::display_name(report.family)), best.hp.describe(), best.train_mean,
          best.validation_mean};
}

std::string render_markdown(const std::vector<CvReport>& reports, std::string_view feature_label) {
  require(!reports.empty(), ErrorCode::kEmptyInput, "no CV reports to render");
  std::ostringstream out;
  out << "Train and test RMSEs per model using " << feature_label << " as the feature.\n\n";
  const auto& cols = report_columns();
  out << "|";
  for (const auto& c : cols) out << " " << c << " |";
  out << "\n|";
  for (std::size_t i = 0; i < cols.size(); ++i) out << " --- |";
  out << "\n";
  bool any_test = false;
  for (const auto& r : reports) {
    const ReportRow row = report_row(r);
    out << "| " << escape_cell(row.model) << " | " << escape_cell(row.hyperparameters) << " | "
        << fixed2(row.train_rmse) << " | " << fixed2(row.test_rmse) << " |\n";
    any_test = any_test || r.test_rmse.has_value();
  }
  if (any_test) {
    out << "\nHeld-out test split RMSE (best configuration refitted on all training rows):\n\n";
    for (const auto& r : reports) {
      if (!r.test_rmse) continue;
      out << "- " << ml::display_name(r.family) << ": " << fixed2(*r.test_rmse) << " (n = "
          << r.n_test.value_or(0) << ")\n";
    }
  }
  return out.str();
}

}  // namespace fcpred
