#include <gtest/gtest.h>

#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fcpred/io_util.hpp"
#include "fcpred/pipeline/commands.hpp"
#include "fcpred/pipeline/config.hpp"
#include "fcpred/pipeline/manifest.hpp"
#include "fcpred/recording_io.hpp"
#include "fcpred/selection.hpp"
#include "fcpred/shap.hpp"
#include "fcpred/synth.hpp"
#include "test_util.hpp"

namespace fcpred::pipeline {
namespace {

using nlohmann::json;
using ::fcpred::testing::scratch_dir;

PipelineConfig config(const fs::path& dir, json j) {
  if (!j.contains("out")) j["out"] = "run";
  return parse_config(j, dir);
}

// Small cohort and a ridge-only search keep each test to well under a second.
json small_cohort_json(int subjects = 20) {
  return {{"seed", 11},
          {"synth",
           {{"kind", "cohort"},
            {"cohort",
             {{"n_subjects", subjects}, {"rois", 5}, {"informative", {{1, 2}, {3, 4}, {0, 3}}}}}}},
          {"train",
           {{"families", {"ridge"}},
            {"k", 5},
            {"repeats", 2},
            {"grids", {{"ridge", {{"alpha", {0.1, 1.0, 10.0}}, {"solver", {"svd"}}}}}}}},
          {"explain", {{"nsamples", 128}, {"background_cap", 10}}}};
}

std::string read(const fs::path& p) { return io::read_text(p); }

int count_files(const fs::path& dir, const std::string& ext) {
  int n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    n += e.is_regular_file() && e.path().extension() == ext;
  }
  return n;
}

// ---------------------------------------------------------------- config

TEST(PipelineConfig, DefaultsRoundTrip) {
  const auto dir = scratch_dir("cfg_roundtrip");
  const PipelineConfig c = config(dir, json::object());
  const json j = to_json(c);
  EXPECT_EQ(to_json(parse_config(j, dir)), j);
  EXPECT_EQ(c.train.k, 10);
  EXPECT_EQ(c.train.repeats, 3);
  EXPECT_EQ(c.connect.metric, Metric::kDtf);
}

TEST(PipelineConfig, UnknownKeysAreRejected) {
  const auto dir = scratch_dir("cfg_unknown");
  EXPECT_FCPRED_ERROR(config(dir, {{"trian", json::object()}}), ErrorCode::kInvalidSpec);
  EXPECT_FCPRED_ERROR(config(dir, {{"train", {{"folds", 5}}}}), ErrorCode::kInvalidSpec);
}

TEST(PipelineConfig, DomainChecks) {
  const auto dir = scratch_dir("cfg_domain");
  EXPECT_FCPRED_ERROR(config(dir, {{"train", {{"k", 1}}}}), ErrorCode::kInvalidSpec);
  EXPECT_FCPRED_ERROR(config(dir, {{"connect", {{"metric", "coherence"}}}}),
                      ErrorCode::kInvalidSpec);
  EXPECT_FCPRED_ERROR(config(dir, {{"train", {{"families", {"ridge", "ridge"}}}}}),
                      ErrorCode::kInvalidSpec);
  EXPECT_FCPRED_ERROR(config(dir, {{"train", {{"grids", {{"ridge", {{"alpha", {-1.0}}}}}}}}}),
                      ErrorCode::kInvalidSpec);
  EXPECT_FCPRED_ERROR(config(dir, {{"synth", {{"mvar", {{"radius", 1.2}}}}}}),
                      ErrorCode::kUnstable);
}

TEST(PipelineConfig, PliDefaultsToBroadband) {
  const auto dir = scratch_dir("cfg_pli");
  const PipelineConfig c = config(dir, {{"connect", {{"metric", "pli"}}}});
  EXPECT_FALSE(c.connect.band_hz.has_value());
  const PipelineConfig named = config(dir, {{"connect", {{"band_hz", "alpha"}}}});
  ASSERT_TRUE(named.connect.band_hz.has_value());
  EXPECT_EQ(*named.connect.band_hz, named_band("alpha"));
}

TEST(PipelineConfig, HashIgnoresRunLocation) {
  const auto dir = scratch_dir("cfg_hash");
  const PipelineConfig a = config(dir, {{"out", "a"}, {"threads", 1}});
  const PipelineConfig b = config(dir, {{"out", "b"}, {"threads", 3}});
  const PipelineConfig s = config(dir, {{"seed", 5}});
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(s));
}

TEST(PipelineConfig, ReferencePageListsEveryKey) {
  const std::string md = defaults_markdown();
  for (const KeyDoc& d : key_docs()) {
    EXPECT_NE(md.find("`" + d.key + "`"), std::string::npos) << d.key;
  }
}

// ---------------------------------------------------------------- manifest

TEST(Manifest, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Manifest, ListsEveryOutputWithItsDigest) {
  const auto dir = scratch_dir("manifest_complete");
  const PipelineConfig c = config(dir, small_cohort_json());
  std::ostringstream log;
  const RunManifest m = cmd_synth(c, log);
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(c.out / "synth")) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name == "manifest.json" || name == "timings.json") continue;
    ++files;
    const std::string rel = e.path().lexically_relative(c.out).generic_string();
    const auto it = std::find_if(m.outputs.begin(), m.outputs.end(),
                                 [&](const ManifestEntry& x) { return x.path == rel; });
    ASSERT_NE(it, m.outputs.end()) << rel;
    EXPECT_EQ(it->sha256, sha256_file(e.path()));
  }
  EXPECT_EQ(files, static_cast<int>(m.outputs.size()));
  EXPECT_EQ(to_json(read_manifest(c.out / "synth" / "manifest.json")), to_json(m));
}

TEST(Manifest, LockRefusesSecondWriter) {
  const auto dir = scratch_dir("manifest_lock");
  const PipelineConfig c = config(dir, small_cohort_json());
  {
    RunLock held(c.out);
    std::ostringstream log;
    EXPECT_FCPRED_ERROR(cmd_synth(c, log), ErrorCode::kIo);
    EXPECT_FALSE(fs::exists(c.out / "synth"));
  }
  EXPECT_FALSE(fs::exists(c.out / ".fcpred.lock"));
}

// ---------------------------------------------------------------- synth

TEST(CmdSynth, CohortWritesTwoMatricesPerSubject) {
  const auto dir = scratch_dir("synth_cohort");
  const PipelineConfig c = config(dir, small_cohort_json(40));
  std::ostringstream log;
  cmd_synth(c, log);
  EXPECT_EQ(count_files(c.out / "synth" / "matrices", ".json"), 80);
  EXPECT_EQ(read_targets(c.out / "synth" / "targets.csv").size(), 40u);
  EXPECT_EQ(read_sessions(c.out / "synth" / "matrices.csv").size(), 40u);
}

TEST(CmdSynth, SameSeedSameDigests) {
  const auto a = scratch_dir("synth_det_a");
  const auto b = scratch_dir("synth_det_b");
  std::ostringstream log;
  const RunManifest ma = cmd_synth(config(a, small_cohort_json()), log);
  const RunManifest mb = cmd_synth(config(b, small_cohort_json()), log);
  EXPECT_EQ(to_json(ma), to_json(mb));
  json other = small_cohort_json();
  other["seed"] = 12;
  const RunManifest mc = cmd_synth(config(a, other), log);
  EXPECT_NE(to_json(ma)["outputs"], to_json(mc)["outputs"]);
}

TEST(CmdSynth, MvarWritesRecordingAndAnalyticDtf) {
  const auto dir = scratch_dir("synth_mvar");
  const PipelineConfig c = config(
      dir, {{"synth", {{"kind", "mvar"}, {"mvar", {{"channels", 3}, {"n_samples", 2000}}}}}});
  std::ostringstream log;
  cmd_synth(c, log);
  const MultichannelRecording rec = read_recording(c.out / "synth" / "mvar.csv");
  EXPECT_EQ(rec.channels(), 3);
  EXPECT_EQ(rec.length(), 2000);
  read_connectivity(c.out / "synth" / "analytic_dtf.json").validate();
}

// ---------------------------------------------------------------- preprocess

// Three seeded channels of 1,024 samples at 256 Hz.
fs::path tiny_recordings(const fs::path& dir) {
  std::string sessions = "subject_id,day1,day10\n";
  for (int s = 0; s < 2; ++s) {
    for (int d = 0; d < 2; ++d) {
      const auto M = ::fcpred::testing::random_matrix(3, 1024, 100 + 10 * s + d);
      const std::string name = "S" + std::to_string(s) + (d ? "_day10.csv" : "_day1.csv");
      write_recording(MultichannelRecording(M, 256.0, {"Fz", "Cz", "Pz"}), dir / "raw" / name);
    }
    sessions += "S" + std::to_string(s) + ",raw/S" + std::to_string(s) + "_day1.csv,raw/S" +
                std::to_string(s) + "_day10.csv\n";
  }
  io::write_text(dir / "sessions.csv", sessions);
  return dir / "sessions.csv";
}

TEST(CmdPreprocess, ByteIdenticalAcrossRuns) {
  const auto dir = scratch_dir("pre_golden");
  tiny_recordings(dir);
  const json j = {{"inputs", {{"recordings", "sessions.csv"}}},
                  {"preprocess", {{"reference", {"Cz"}}, {"baseline_s", {0.0, 0.5}},
                                  {"epoch_s", {0.5, 3.5}}}}};
  std::ostringstream log;
  const RunManifest a = cmd_preprocess(config(dir, j), log);
  const std::string first = read(dir / "run" / "preprocessed" / "recordings" / "S0_day1.csv");
  const RunManifest b = cmd_preprocess(config(dir, j), log);
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_EQ(read(dir / "run" / "preprocessed" / "recordings" / "S0_day1.csv"), first);
  // Digest recorded from the first verified run.
  EXPECT_EQ(sha256_hex(first), "d4654648d4fb3d02f8750c0523c73b86149980036403b07044790a34d7f7fd25");
  const MultichannelRecording out =
      read_recording(dir / "run" / "preprocessed" / "recordings" / "S0_day1.csv");
  EXPECT_EQ(out.length(), 768);
  EXPECT_EQ(out.samples().row(1).cwiseAbs().maxCoeff(), 0.0);  // Cz re-referenced to itself
}

TEST(CmdPreprocess, NyquistViolationRejectedBeforeWriting) {
  const auto dir = scratch_dir("pre_nyquist");
  tiny_recordings(dir);
  const json j = {{"inputs", {{"recordings", "sessions.csv"}}},
                  {"preprocess", {{"filters", {{{"kind", "bandpass"}, {"low_hz", 1.0},
                                                {"high_hz", 200.0}}}}}}};
  std::ostringstream log;
  EXPECT_FCPRED_ERROR(cmd_preprocess(config(dir, j), log), ErrorCode::kInvalidSpec);
  EXPECT_FALSE(fs::exists(dir / "run"));
}

TEST(CmdPreprocess, MissingSidecarNamesExpectedPath) {
  const auto dir = scratch_dir("pre_sidecar");
  tiny_recordings(dir);
  fs::remove(dir / "raw" / "S1_day10.json");
  std::ostringstream log;
  try {
    cmd_preprocess(config(dir, {{"inputs", {{"recordings", "sessions.csv"}}}}), log);
    ADD_FAILURE() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
    EXPECT_NE(std::string(e.what()).find("S1_day10.json"), std::string::npos) << e.what();
  }
  EXPECT_FALSE(fs::exists(dir / "run"));
}

TEST(CmdPreprocess, UnknownReferenceChannel) {
  const auto dir = scratch_dir("pre_ref");
  tiny_recordings(dir);
  std::ostringstream log;
  EXPECT_FCPRED_ERROR(cmd_preprocess(config(dir, {{"inputs", {{"recordings", "sessions.csv"}}},
                                                  {"preprocess", {{"reference", {"Oz"}}}}}),
                                     log),
                      ErrorCode::kMissingChannel);
}

// ---------------------------------------------------------------- connect

TEST(CmdConnect, DtfOnUnidirectionalRecordings) {
  const auto dir = scratch_dir("connect_dtf");
  std::string sessions = "subject_id,day1,day10\n";
  for (int s = 0; s < 2; ++s) {
    for (int d = 0; d < 2; ++d) {
      PlantedMvar p = unidirectional_pair(0.9, 0.5, 128.0, 500 + 2 * s + d);
      write_recording(gen_mvar_signal(p, 8000),
                      dir / ("S" + std::to_string(s) + (d ? "_day10.csv" : "_day1.csv")));
    }
    sessions += "S" + std::to_string(s) + ",S" + std::to_string(s) + "_day1.csv,S" +
                std::to_string(s) + "_day10.csv\n";
  }
  io::write_text(dir / "sessions.csv", sessions);
  const PipelineConfig c = config(
      dir, {{"inputs", {{"recordings", "sessions.csv"}}},
            {"connect", {{"band_hz", {1.0, 40.0}}, {"order_policy", "fixed"}, {"order", 2}}}});
  std::ostringstream log;
  cmd_connect(c, log);
  EXPECT_NE(log.str().find("warning"), std::string::npos);  // not preprocessed
  for (const auto& row : read_sessions(c.out / "connect" / "matrices.csv")) {
    for (const fs::path& p : {row.day1, row.day10}) {
      const ConnectivityMatrix m = read_connectivity(p);
      m.validate();
      // Channel 0 drives channel 1: the sink row 1 hears source 0.
      EXPECT_GT(m.values(1, 0), 20.0 * m.values(0, 1)) << p;
    }
  }
  EXPECT_TRUE(fs::exists(c.out / "connect" / "models.csv"));
}

TEST(CmdConnect, PliOnIdenticalChannelsIsZero) {
  const auto dir = scratch_dir("connect_pli");
  const auto x = ::fcpred::testing::random_matrix(1, 2048, 77);
  Eigen::MatrixXd M(3, 2048);
  M << x, x, x;
  for (const char* d : {"a_day1.csv", "a_day10.csv"}) {
    write_recording(MultichannelRecording(M, 128.0, {"A", "B", "C"}), dir / d);
  }
  io::write_text(dir / "sessions.csv", "subject_id,day1,day10\nS1,a_day1.csv,a_day10.csv\n");
  const PipelineConfig c =
      config(dir, {{"inputs", {{"recordings", "sessions.csv"}}}, {"connect", {{"metric", "pli"}}}});
  std::ostringstream log;
  cmd_connect(c, log);
  const ConnectivityMatrix m = read_connectivity(c.out / "connect" / "matrices" / "S1_day1.json");
  EXPECT_EQ(m.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(CmdConnect, BandAboveNyquistRejected) {
  const auto dir = scratch_dir("connect_nyq");
  tiny_recordings(dir);  // 256 Hz
  const PipelineConfig c = config(dir, {{"inputs", {{"recordings", "sessions.csv"}}},
                                        {"connect", {{"band_hz", {1.0, 130.0}}}}});
  std::ostringstream log;
  EXPECT_FCPRED_ERROR(cmd_connect(c, log), ErrorCode::kInvalidSpec);
  EXPECT_FALSE(fs::exists(c.out / "connect"));
}

// ---------------------------------------------------------------- features

TEST(CmdFeatures, TargetsFromTraces) {
  const auto dir = scratch_dir("features_traces");
  std::ostringstream log;
  const PipelineConfig synth = config(dir, small_cohort_json(4));
  cmd_synth(synth, log);
  std::string targets = "subject_id,trace\n";
  for (int s = 1; s <= 4; ++s) {
    // Cursor offset by (3, 4) from the target everywhere: RMSE exactly 5 * s.
    std::string trace = "cursor_x,cursor_y,target_x,target_y\n";
    for (int t = 0; t < 5; ++t) {
      trace += std::to_string(t + 3 * s) + "," + std::to_string(4 * s) + "," +
               std::to_string(t) + ",0\n";
    }
    const std::string name = "trace" + std::to_string(s) + ".csv";
    io::write_text(dir / name, trace);
    targets += "S00" + std::to_string(s) + "," + name + "\n";
  }
  io::write_text(dir / "targets.csv", targets);
  json j = small_cohort_json(4);
  j["inputs"] = {{"targets", "targets.csv"}};
  cmd_features(config(dir, j), log);
  const Dataset d = read_dataset(dir / "run" / "features" / "dataset.csv");
  ASSERT_EQ(d.rows(), 4);
  for (int s = 0; s < 4; ++s) EXPECT_DOUBLE_EQ(d.y(s), 5.0 * (s + 1));
  EXPECT_EQ(d.features(), 25);
}

TEST(CmdFeatures, MissingTargetIsALabelMismatch) {
  const auto dir = scratch_dir("features_missing");
  std::ostringstream log;
  cmd_synth(config(dir, small_cohort_json(4)), log);
  io::write_text(dir / "targets.csv", "subject_id,target\nS001,1\nS002,2\nS003,3\n");
  json j = small_cohort_json(4);
  j["inputs"] = {{"targets", "targets.csv"}};
  EXPECT_FCPRED_ERROR(cmd_features(config(dir, j), log), ErrorCode::kLabelMismatch);
}

TEST(CmdFeatures, MalformedTargetNamesLineAndColumn) {
  const auto dir = scratch_dir("features_malformed");
  io::write_text(dir / "targets.csv", "subject_id,target\nS001,1\nS002,abc\n");
  try {
    read_targets(dir / "targets.csv");
    ADD_FAILURE() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("line 3, column 2"), std::string::npos) << e.what();
  }
}

// ---------------------------------------------------------------- train / explain

TEST(CmdTrain, PlantedCohortBeatsConstantBaseline) {
  const auto dir = scratch_dir("train_planted");
  json j = small_cohort_json(40);
  j["synth"]["cohort"]["effects"] = {0.03, 0.03, 0.03};
  j["synth"]["cohort"]["informative"] = {{1, 2}, {3, 4}, {0, 1}};
  j["train"]["grids"]["ridge"]["alpha"] = {0.01, 0.1, 1.0, 10.0};
  const PipelineConfig c = config(dir, j);
  std::ostringstream log;
  cmd_synth(c, log);
  cmd_features(c, log);
  cmd_train(c, log);
  const json summary = json::parse(read(c.out / "train" / "summary.json"));
  const double baseline = summary.at("baseline_validation_rmse").get<double>();
  const double best = summary.at("families")[0].at("validation_rmse").get<double>();
  EXPECT_LT(best, 0.8 * baseline) << summary.dump(2);
  EXPECT_FALSE(summary.at("constant_target").get<bool>());
  EXPECT_EQ(summary.at("selected"), "ridge");
  const std::string md = read(c.out / "train" / "report.md");
  EXPECT_NE(md.find("| Ridge Regression |"), std::string::npos);

  // Same seed, same best hyperparameters and same models.
  const auto again = scratch_dir("train_planted_again");
  const PipelineConfig c2 = config(again, j);
  cmd_synth(c2, log);
  cmd_features(c2, log);
  cmd_train(c2, log);
  EXPECT_EQ(read(c2.out / "train" / "model_ridge.json"), read(c.out / "train" / "model_ridge.json"));
  EXPECT_EQ(read(c2.out / "train" / "manifest.json"), read(c.out / "train" / "manifest.json"));
}

TEST(CmdTrain, AssemblesDatasetWhenFeaturesWereSkipped) {
  const auto dir = scratch_dir("train_assemble");
  const PipelineConfig c = config(dir, small_cohort_json());
  std::ostringstream log;
  cmd_synth(c, log);
  cmd_train(c, log);
  EXPECT_NE(log.str().find("assembling"), std::string::npos);
  EXPECT_TRUE(fs::exists(c.out / "train" / "cv_ridge.json"));
}

TEST(CmdTrain, ConstantTargetWarnsAndFlags) {
  const auto dir = scratch_dir("train_constant");
  std::ostringstream log;
  cmd_synth(config(dir, small_cohort_json()), log);
  std::string targets = "subject_id,target\n";
  for (int s = 1; s <= 20; ++s) {
    char id[8];
    std::snprintf(id, sizeof id, "S%03d", s);
    targets += std::string(id) + ",7\n";
  }
  io::write_text(dir / "targets.csv", targets);
  json j = small_cohort_json();
  j["inputs"] = {{"targets", "targets.csv"}};
  const PipelineConfig c = config(dir, j);
  cmd_train(c, log);
  EXPECT_NE(log.str().find("warning"), std::string::npos);
  const json summary = json::parse(read(c.out / "train" / "summary.json"));
  EXPECT_TRUE(summary.at("constant_target").get<bool>());
  EXPECT_NE(read(c.out / "train" / "report.md").find("constant"), std::string::npos);

  // The fitted model is constant too, so every attribution is zero.
  cmd_explain(c, log);
  const ShapExplanation e =
      explanation_from_json(json::parse(read(c.out / "explain" / "shap.json")));
  EXPECT_EQ(e.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(CmdTrain, FoldCountAboveSubjectsRejected) {
  const auto dir = scratch_dir("train_k");
  json j = small_cohort_json(6);
  j["train"]["k"] = 8;
  const PipelineConfig c = config(dir, j);
  std::ostringstream log;
  cmd_synth(c, log);
  EXPECT_FCPRED_ERROR(cmd_train(c, log), ErrorCode::kInvalidSpec);
  EXPECT_FALSE(fs::exists(c.out / "train"));
}

TEST(CmdExplain, SummaryFormatAndFeatureCountCheck) {
  const auto dir = scratch_dir("explain_summary");
  const PipelineConfig c = config(dir, small_cohort_json());
  std::ostringstream log;
  cmd_synth(c, log);
  cmd_features(c, log);
  cmd_train(c, log);
  cmd_explain(c, log);
  const std::string csv = read(c.out / "explain" / "shap_summary.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "rank,feature_index,roi_a,roi_b,mean_abs_shap");
  EXPECT_TRUE(fs::exists(c.out / "explain" / "shap_points.csv"));

  // A model trained on a different feature count is refused.
  const auto other = scratch_dir("explain_summary_other");
  json j = small_cohort_json();
  j["synth"]["cohort"]["rois"] = 4;
  j["synth"]["cohort"]["informative"] = {{1, 2}, {3, 0}, {0, 3}};
  const PipelineConfig c2 = config(other, j);
  cmd_synth(c2, log);
  cmd_train(c2, log);
  PipelineConfig mixed = c;
  mixed.inputs.model = c2.out / "train" / "model_ridge.json";
  EXPECT_FCPRED_ERROR(cmd_explain(mixed, log), ErrorCode::kShapeMismatch);
}

TEST(CmdReport, RendersGivenReports) {
  const auto dir = scratch_dir("report_files");
  const PipelineConfig c = config(dir, small_cohort_json());
  std::ostringstream log;
  cmd_synth(c, log);
  cmd_train(c, log);
  cmd_report(c, {c.out / "train" / "cv_ridge.json"}, log);
  const std::string md = read(c.out / "report" / "report.md");
  EXPECT_NE(md.find("| Machine learning model | Optimal hyperparameters |"), std::string::npos);
  EXPECT_NE(md.find("| Ridge Regression |"), std::string::npos);
}

}  // namespace
}  // namespace fcpred::pipeline
