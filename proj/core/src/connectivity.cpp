#include "fcpred/connectivity.hpp"

#include <cmath>

#include "fcpred/error.hpp"
#include "fcpred/io_util.hpp"

namespace fcpred {

std::string_view to_string(Metric m) { return m == Metric::kDtf ? "DTF" : "PLI"; }

Metric parse_metric(std::string_view s) {
  if (s == "DTF" || s == "dtf") return Metric::kDtf;
  if (s == "PLI" || s == "pli") return Metric::kPli;
  throw Error(ErrorCode::kInvalidSpec, "unknown metric '" + std::string(s) + "'");
}

void ConnectivityMatrix::validate(double tol) const {
  const Eigen::Index r = values.rows();
  require(r > 0 && values.cols() == r, ErrorCode::kShapeMismatch,
          "connectivity matrix must be square and non-empty");
  require(static_cast<Eigen::Index>(roi_labels.size()) == r, ErrorCode::kLabelMismatch,
          "roi label count does not match matrix size");
  require(values.allFinite(), ErrorCode::kDegenerate, "connectivity matrix not finite");
  // Entry range tolerance is looser than the row-sum tolerance only by rounding.
  require(values.minCoeff() >= -tol && values.maxCoeff() <= 1.0 + tol,
          ErrorCode::kDegenerate, "connectivity entries outside [0, 1]");
  if (metric == Metric::kDtf) {
    for (Eigen::Index a = 0; a < r; ++a) {
      const double s = values.row(a).sum();
      require(std::abs(s - 1.0) <= tol, ErrorCode::kDegenerate,
              "DTF row " + std::to_string(a) + " sums to " + io::format_double(s));
    }
  } else {
    require((values - values.transpose()).cwiseAbs().maxCoeff() <= tol,
            ErrorCode::kDegenerate, "PLI matrix not symmetric");
    require(values.diagonal().cwiseAbs().maxCoeff() == 0.0, ErrorCode::kDegenerate,
            "PLI diagonal must be zero");
  }
}

nlohmann::json to_json(const ConnectivityMatrix& m) {
  nlohmann::json j;
  j["metric"] = std::string(to_string(m.metric));
  j["roi_labels"] = m.roi_labels;
  if (m.band_hz) {
    j["band_hz"] = {m.band_hz->first, m.band_hz->second};
  } else {
    j["band_hz"] = "broadband";
  }
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.values.size()));
  for (Eigen::Index a = 0; a < m.values.rows(); ++a) {
    for (Eigen::Index b = 0; b < m.values.cols(); ++b) flat.push_back(m.values(a, b));
  }
  j["values"] = flat;
  return j;
}

ConnectivityMatrix connectivity_from_json(const nlohmann::json& j) {
  try {
    ConnectivityMatrix m;
    m.metric = parse_metric(j.at("metric").get<std::string>());
    m.roi_labels = j.at("roi_labels").get<std::vector<std::string>>();
    const auto& band = j.at("band_hz");
    if (band.is_array()) {
      m.band_hz = std::make_pair(band.at(0).get<double>(), band.at(1).get<double>());
    }
    const auto flat = j.at("values").get<std::vector<double>>();
    const auto r = static_cast<Eigen::Index>(m.roi_labels.size());
    require(static_cast<Eigen::Index>(flat.size()) == r * r, ErrorCode::kShapeMismatch,
            "values length does not match roi_labels squared");
    m.values.resize(r, r);
    for (Eigen::Index a = 0; a < r; ++a) {
      for (Eigen::Index b = 0; b < r; ++b) m.values(a, b) = flat[a * r + b];
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed connectivity JSON: ") + e.what());
  }
}

void write_connectivity(const ConnectivityMatrix& m, const std::filesystem::path& path) {
  io::write_text(path, to_json(m).dump(2) + "\n");
}

ConnectivityMatrix read_connectivity(const std::filesystem::path& path) {
  try {
    return connectivity_from_json(nlohmann::json::parse(io::read_text(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, "'" + path.string() + "': " + e.what());
  }
}

std::string connectivity_csv(const ConnectivityMatrix& m) {
  std::string out = "roi";
  for (const auto& l : m.roi_labels) out += "," + l;
  out += '\n';
  for (Eigen::Index a = 0; a < m.values.rows(); ++a) {
    out += m.roi_labels[a];
    for (Eigen::Index b = 0; b < m.values.cols(); ++b) {
      out += "," + io::format_double(m.values(a, b));
    }
    out += '\n';
  }
  return out;
}

}  // namespace fcpred
