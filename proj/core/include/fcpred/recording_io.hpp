#pragma once

#include <filesystem>

#include "fcpred/recording.hpp"

namespace fcpred {

// CSV: header row of channel labels, one row per sample. The JSON sidecar
// next to it (same stem, .json) carries {"rate_hz": ..., "meta": {...}}.
MultichannelRecording read_recording(const std::filesystem::path& csv_path);
void write_recording(const MultichannelRecording& rec,
                     const std::filesystem::path& csv_path);

// Reads only the sidecar; used to validate filter specs before any work.
double read_recording_rate(const std::filesystem::path& csv_path);

}  // namespace fcpred
