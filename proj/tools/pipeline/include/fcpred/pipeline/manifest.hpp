#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fcpred::pipeline {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);

struct ManifestEntry {
  std::string path;  // '/' separated, relative to the run directory
  std::string sha256;
};

// Record of one command run. Wall-clock timings live in a sibling
// timings.json so the manifest is reproducible byte for byte.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> inputs;
  std::vector<ManifestEntry> outputs;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
RunManifest read_manifest(const fs::path& path);

// Builds one stage directory (<run>/<stage>) in a hidden staging directory
// and swaps it into place on commit, so a failed command leaves the previous
// stage output untouched. Every file in the staging tree is hashed into the
// manifest.
class StageWriter {
 public:
  StageWriter(fs::path run_dir, std::string stage);
  ~StageWriter();
  StageWriter(const StageWriter&) = delete;
  StageWriter& operator=(const StageWriter&) = delete;

  const fs::path& run_dir() const { return run_dir_; }
  // Where files go while the stage is being built.
  const fs::path& staging() const { return staging_; }
  // Where the stage ends up after commit.
  fs::path final_dir() const { return run_dir_ / stage_; }

  fs::path path(const std::string& rel) const { return staging_ / rel; }
  // Writes staging()/rel and returns the final path of the file.
  fs::path write(const std::string& rel, std::string_view content);
  void input(const fs::path& file);
  void time(const std::string& step, double seconds);

  RunManifest commit(const std::string& config_hash, std::uint64_t seed);

 private:
  std::string input_name(const fs::path& file) const;

  fs::path run_dir_;
  std::string stage_;
  fs::path staging_;
  bool committed_ = false;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, double>> timings_;
};

// Exclusive lock on a run directory, held for the object's lifetime.
class RunLock {
 public:
  explicit RunLock(const fs::path& run_dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
};

}  // namespace fcpred::pipeline
