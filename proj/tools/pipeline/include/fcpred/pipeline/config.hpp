#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fcpred/connectivity.hpp"
#include "fcpred/features.hpp"
#include "fcpred/mvar.hpp"
#include "fcpred/selection.hpp"
#include "fcpred/signal.hpp"
#include "fcpred/synth.hpp"

namespace fcpred::pipeline {

namespace fs = std::filesystem;

// Explicit input locations. Anything left unset is taken from the upstream
// stage's output under the run directory.
struct InputsConfig {
  std::optional<fs::path> recordings;  // CSV: subject_id, day1, day10
  std::optional<fs::path> matrices;    // CSV: subject_id, day1, day10
  std::optional<fs::path> targets;     // CSV: subject_id, target | trace
  std::optional<fs::path> dataset;
  std::optional<fs::path> model;
};

struct PreprocessConfig {
  std::vector<FilterSpec> filters{FilterSpec::bandpass(0.1, 45.0, 4),
                                  FilterSpec::notch(50.0, 2.0)};
  // Channels averaged into the new reference; empty keeps the recorded one.
  std::vector<std::string> reference;
  // Window (seconds) whose per-channel mean is subtracted; unset skips it.
  std::optional<std::pair<double, double>> baseline_s;
  // Window (seconds) kept after the other steps; unset keeps everything.
  std::optional<std::pair<double, double>> epoch_s;
};

enum class OrderPolicy { kFixed, kAic, kBic };

struct ConnectConfig {
  Metric metric = Metric::kDtf;
  // DTF averaging band. For PLI a band means "bandpass first"; unset is
  // broadband.
  std::optional<std::pair<double, double>> band_hz = std::make_pair(1.0, 45.0);
  double freq_step_hz = 0.5;
  OrderPolicy order_policy = OrderPolicy::kBic;
  int order = 4;       // used by the fixed policy
  int max_order = 10;  // upper end of the AIC/BIC search
  double pli_edge_trim = 0.1;
};

struct TrainConfig {
  std::vector<ml::Family> families = ml::all_families();
  bool full_grids = false;
  // Per-family axis overrides, merged over the default grid.
  std::map<ml::Family, nlohmann::json> grids;
  int k = 10;
  int repeats = 3;
  std::optional<std::uint64_t> cv_seed;
  int mlp_epochs = 300;
  double svr_tol = 1e-3;
};

struct ExplainConfig {
  int nsamples = 2048;
  int background_cap = 40;
  std::optional<ml::Family> family;  // default: lowest validation RMSE
};

enum class SynthKind { kCohort, kRecordings, kMvar };

struct MvarSynthConfig {
  int channels = 4;
  int order = 2;
  double radius = 0.9;
  long n_samples = 20000;
  double rate_hz = 128.0;
};

struct SynthConfig {
  SynthKind kind = SynthKind::kCohort;
  // Seeds come from the master seed; the seed fields here are ignored.
  PlantedCohort cohort{.informative = {{1, 2}, {3, 5}, {6, 0}}, .effects = {0.03, 0.03, 0.03}};
  RecordingCohortSpec recordings;
  MvarSynthConfig mvar;
};

struct PipelineConfig {
  fs::path base_dir;  // relative input paths resolve here
  std::uint64_t seed = 0;
  fs::path out = "fcpred-run";
  int threads = 1;
  InputsConfig inputs;
  PreprocessConfig preprocess;
  ConnectConfig connect;
  DiffMode feature_mode = DiffMode::kAbsolute;
  TrainConfig train;
  ExplainConfig explain;
  SynthConfig synth;
};

// Unknown keys, wrong types and out-of-domain values throw kInvalidSpec.
PipelineConfig parse_config(const nlohmann::json& j, const fs::path& base_dir);
PipelineConfig load_config(const fs::path& path);

// Canonical JSON form; parse_config(to_json(c)) == c.
nlohmann::json to_json(const PipelineConfig& c);
// Same, without run-location keys (out, threads), for hashing.
nlohmann::json hashed_view(const PipelineConfig& c);

struct KeyDoc {
  std::string key;  // dotted path
  std::string description;
};
const std::vector<KeyDoc>& key_docs();
// Markdown reference page listing every key with its default value.
std::string defaults_markdown();

std::string_view to_string(OrderPolicy p);
std::string_view to_string(SynthKind k);

}  // namespace fcpred::pipeline
