#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fcpred {

enum class Metric { kDtf, kPli };

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view s);

// Frequency band in Hz; nullopt means broadband.
using Band = std::optional<std::pair<double, double>>;

// R x R adjacency. DTF: directed, entries in [0,1], rows sum to 1 (sink a,
// source b). PLI: symmetric, zero diagonal, entries in [0,1].
struct ConnectivityMatrix {
  Eigen::MatrixXd values;
  Metric metric = Metric::kDtf;
  std::vector<std::string> roi_labels;
  Band band_hz;

  Eigen::Index size() const { return values.rows(); }

  // Checks the metric invariants; throws kDegenerate describing the first
  // violation. tol applies to row sums (DTF) and symmetry (PLI).
  void validate(double tol = 1e-9) const;
};

nlohmann::json to_json(const ConnectivityMatrix& m);
ConnectivityMatrix connectivity_from_json(const nlohmann::json& j);

void write_connectivity(const ConnectivityMatrix& m, const std::filesystem::path& path);
ConnectivityMatrix read_connectivity(const std::filesystem::path& path);
// Plain matrix dump with a label header row and label first column.
std::string connectivity_csv(const ConnectivityMatrix& m);

}  // namespace fcpred
