#include "fcpred/recording_io.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

#include "fcpred/error.hpp"
#include "fcpred/io_util.hpp"

namespace fcpred {
namespace {

nlohmann::json read_sidecar(const std::filesystem::path& csv_path) {
  const auto side = io::sidecar_path(csv_path);
  if (!std::filesystem::exists(side)) {
    throw Error(ErrorCode::kIo, "missing sidecar JSON; expected '" + side.string() + "'");
  }
  try {
    return nlohmann::json::parse(io::read_text(side));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "malformed sidecar '" + side.string() + "': " + e.what());
  }
}

double rate_from(const nlohmann::json& side, const std::filesystem::path& csv_path) {
  if (!side.contains("rate_hz") || !side["rate_hz"].is_number()) {
    throw Error(ErrorCode::kParse,
                "sidecar for '" + csv_path.string() + "' lacks numeric rate_hz");
  }
  return side["rate_hz"].get<double>();
}

}  // namespace

double read_recording_rate(const std::filesystem::path& csv_path) {
  return rate_from(read_sidecar(csv_path), csv_path);
}

MultichannelRecording read_recording(const std::filesystem::path& csv_path) {
  const nlohmann::json side = read_sidecar(csv_path);
  const double rate = rate_from(side, csv_path);
  MultichannelRecording::Meta meta;
  if (side.contains("meta") && side["meta"].is_object()) {
    for (const auto& [k, v] : side["meta"].items()) {
      meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }

  const std::string text = io::read_text(csv_path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kParse, "'" + csv_path.string() + "' is empty");
  }
  std::vector<std::string> labels = io::split_csv_line(line);
  const std::size_t width = labels.size();

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = io::split_csv_line(line);
    if (fields.size() != width) {
      throw Error(ErrorCode::kParse, csv_path.string() + " row " + std::to_string(line_no) +
                                         ": expected " + std::to_string(width) +
                                         " columns, found " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < width; ++c) {
      values.push_back(io::parse_double(
          fields[c], csv_path.string() + " row " + std::to_string(line_no) + " column " +
                         std::to_string(c + 1)));
    }
    ++rows;
  }
  require(rows > 0, ErrorCode::kEmptyInput, "'" + csv_path.string() + "' has no samples");

  Eigen::MatrixXd samples(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(rows));
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t c = 0; c < width; ++c) samples(c, t) = values[t * width + c];
  }
  return MultichannelRecording(std::move(samples), rate, std::move(labels), std::move(meta));
}

void write_recording(const MultichannelRecording& rec,
                     const std::filesystem::path& csv_path) {
  std::string out;
  for (std::size_t c = 0; c < rec.labels().size(); ++c) {
    if (c) out += ',';
    out += rec.labels()[c];
  }
  out += '\n';
  for (Eigen::Index t = 0; t < rec.length(); ++t) {
    for (Eigen::Index c = 0; c < rec.channels(); ++c) {
      if (c) out += ',';
      out += io::format_double(rec.samples()(c, t));
    }
    out += '\n';
  }
  io::write_text(csv_path, out);

  nlohmann::json side;
  side["rate_hz"] = rec.rate_hz();
  side["meta"] = nlohmann::json::object();
  for (const auto& [k, v] : rec.meta()) side["meta"][k] = v;
  io::write_text(io::sidecar_path(csv_path), side.dump(2) + "\n");
}

}  // namespace fcpred
