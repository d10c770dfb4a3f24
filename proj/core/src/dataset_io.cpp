#include <nlohmann/json.hpp>
#include <sstream>

#include "fcpred/error.hpp"
#include "fcpred/features.hpp"
#include "fcpred/io_util.hpp"

namespace fcpred {

nlohmann::json to_json(const FeatureMeta& meta) {
  nlohmann::json j;
  j["metric"] = std::string(to_string(meta.metric));
  j["mode"] = std::string(to_string(meta.mode));
  j["roi_labels"] = meta.roi_labels;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : meta.index_map) pairs.push_back({a, b});
  j["index_map"] = pairs;
  return j;
}

FeatureMeta feature_meta_from_json(const nlohmann::json& j) {
  try {
    FeatureMeta meta = FeatureMeta::for_matrix(
        parse_metric(j.at("metric").get<std::string>()),
        j.at("roi_labels").get<std::vector<std::string>>(),
        parse_diff_mode(j.value("mode", std::string("absolute"))));
    if (j.contains("index_map")) {
      std::vector<std::pair<int, int>> stored;
      for (const auto& p : j.at("index_map")) stored.emplace_back(p.at(0), p.at(1));
      require(stored == meta.index_map, ErrorCode::kParse,
              "stored index_map disagrees with the canonical layout");
    }
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed feature metadata: ") + e.what());
  }
}

void write_dataset(const Dataset& data, const std::filesystem::path& csv_path) {
  data.validate();
  std::string out = "subject_id";
  for (Eigen::Index j = 0; j < data.features(); ++j) out += "," + std::to_string(j);
  out += ",target\n";
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    out += data.subject_ids[i];
    for (Eigen::Index j = 0; j < data.features(); ++j) {
      out += "," + io::format_double(data.X(i, j));
    }
    out += "," + io::format_double(data.y(i)) + "\n";
  }
  io::write_text(csv_path, out);
  io::write_text(io::sidecar_path(csv_path), to_json(data.meta).dump(2) + "\n");
}

Dataset read_dataset(const std::filesystem::path& csv_path) {
  const auto side = io::sidecar_path(csv_path);
  if (!std::filesystem::exists(side)) {
    throw Error(ErrorCode::kIo, "missing dataset metadata; expected '" + side.string() + "'");
  }
  Dataset data;
  try {
    data.meta = feature_meta_from_json(nlohmann::json::parse(io::read_text(side)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, "'" + side.string() + "': " + e.what());
  }

  std::istringstream in(io::read_text(csv_path));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParse,
          "'" + csv_path.string() + "' is empty");
  const auto header = io::split_csv_line(line);
  const std::size_t p = data.meta.size();
  require(header.size() == p + 2, ErrorCode::kParse,
          "'" + csv_path.string() + "' header has " + std::to_string(header.size()) +
              " columns, expected " + std::to_string(p + 2));

  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = io::split_csv_line(line);
    require(fields.size() == p + 2, ErrorCode::kParse,
            csv_path.string() + " row " + std::to_string(line_no) + ": expected " +
                std::to_string(p + 2) + " columns, found " + std::to_string(fields.size()));
    data.subject_ids.push_back(fields[0]);
    std::vector<double> row(p);
    for (std::size_t j = 0; j < p; ++j) {
      row[j] = io::parse_double(fields[j + 1], csv_path.string() + " row " +
                                                   std::to_string(line_no) + " column " +
                                                   std::to_string(j + 2));
    }
    rows.push_back(std::move(row));
    targets.push_back(io::parse_double(
        fields[p + 1], csv_path.string() + " row " + std::to_string(line_no) + " target"));
  }
  data.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
  data.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) data.X(i, j) = rows[i][j];
    data.y(i) = targets[i];
  }
  data.validate();
  return data;
}

TrackingTrace read_tracking_trace(const std::filesystem::path& path) {
  std::istringstream in(io::read_text(path));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParse,
          "'" + path.string() + "' is empty");
  const auto header = io::split_csv_line(line);
  require(header.size() == 4, ErrorCode::kParse,
          "'" + path.string() + "' must have columns cursor_x,cursor_y,target_x,target_y");
  TrackingTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = io::split_csv_line(line);
    require(f.size() == 4, ErrorCode::kParse,
            path.string() + " row " + std::to_string(line_no) + ": expected 4 columns");
    const std::string where = path.string() + " row " + std::to_string(line_no);
    trace.cursor.emplace_back(io::parse_double(f[0], where), io::parse_double(f[1], where));
    trace.target.emplace_back(io::parse_double(f[2], where), io::parse_double(f[3], where));
  }
  return trace;
}

}  // namespace fcpred
