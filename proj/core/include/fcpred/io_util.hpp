#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fcpred::io {

// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);
// Parses a full field as a double; throws kParse naming the location.
double parse_double(std::string_view field, const std::string& where);

std::vector<std::string> split_csv_line(std::string_view line);

std::string read_text(const std::filesystem::path& path);
// Creates parent directories as needed.
void write_text(const std::filesystem::path& path, std::string_view content);

// a.csv -> a.json
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace fcpred::io
