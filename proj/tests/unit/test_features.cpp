#include <gtest/gtest.h>

#include <fstream>

#include "fcpred/connectivity.hpp"
#include "fcpred/features.hpp"
#include "fcpred/io_util.hpp"
#include "fcpred/recording_io.hpp"
#include "fcpred/synth.hpp"
#include "test_util.hpp"

namespace fcpred {
namespace {

ConnectivityMatrix random_dtf(int r, std::uint64_t seed) {
  Eigen::MatrixXd v = testing::random_matrix(r, r, seed).cwiseAbs().array() + 0.01;
  for (int a = 0; a < r; ++a) v.row(a) /= v.row(a).sum();
  return {v, Metric::kDtf, roi_labels(r), std::make_pair(1.0, 45.0)};
}

ConnectivityMatrix random_pli(int r, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(r, r);
  for (int a = 0; a < r; ++a) {
    for (int b = a + 1; b < r; ++b) v(a, b) = v(b, a) = rng.uniform();
  }
  return {v, Metric::kPli, roi_labels(r), std::nullopt};
}

TEST(FeatureMeta, DtfIsRowMajorFullGrid) {
  const auto meta = FeatureMeta::for_matrix(Metric::kDtf, roi_labels(4));
  ASSERT_EQ(meta.size(), 16u);
  for (int i = 0; i < 16; ++i) {
    EXPECT_EQ(meta.index_map[i], std::make_pair(i / 4, i % 4));
    EXPECT_EQ(meta.feature_index(i / 4, i % 4), i);
  }
}

TEST(FeatureMeta, PliIsStrictUpperTriangle) {
  for (int r = 2; r <= 9; ++r) {
    const auto meta = FeatureMeta::for_matrix(Metric::kPli, roi_labels(r));
    ASSERT_EQ(meta.size(), static_cast<std::size_t>(r * (r - 1) / 2));
    for (std::size_t i = 0; i < meta.size(); ++i) {
      const auto [a, b] = meta.index_map[i];
      EXPECT_LT(a, b);
      EXPECT_EQ(meta.feature_index(a, b), static_cast<int>(i));
      EXPECT_EQ(meta.feature_index(b, a), -1);
    }
    EXPECT_EQ(meta.feature_index(0, 0), -1);
  }
}

TEST(DiffFeatures, AbsoluteIsSymmetricAndNonNegative) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = random_dtf(5, seed), b = random_dtf(5, seed + 100);
    const auto ab = diff_features(a, b), ba = diff_features(b, a);
    EXPECT_EQ(ab.values, ba.values);
    EXPECT_GE(ab.values.minCoeff(), 0.0);
    for (std::size_t i = 0; i < ab.meta.size(); ++i) {
      const auto [r, c] = ab.meta.index_map[i];
      EXPECT_EQ(ab.values(i), std::abs(b.values(r, c) - a.values(r, c)));
    }
  }
}

TEST(DiffFeatures, IdenticalSessionsGiveZero) {
  const auto a = random_pli(6, 3);
  EXPECT_TRUE(diff_features(a, a).values.isZero(0.0));
  EXPECT_EQ(diff_features(a, a).values.size(), 15);
}

TEST(DiffFeatures, SignedModeKeepsDirection) {
  const auto a = random_dtf(3, 1), b = random_dtf(3, 2);
  const auto s = diff_features(a, b, DiffMode::kSigned);
  const auto abs = diff_features(a, b, DiffMode::kAbsolute);
  EXPECT_TRUE(s.values.cwiseAbs().isApprox(abs.values));
  EXPECT_DOUBLE_EQ(s.values(1), b.values(0, 1) - a.values(0, 1));
  EXPECT_EQ(parse_diff_mode(to_string(DiffMode::kSigned)), DiffMode::kSigned);
  EXPECT_FCPRED_ERROR(parse_diff_mode("both"), ErrorCode::kInvalidSpec);
}

TEST(DiffFeatures, RejectsMismatchedInputs) {
  auto a = random_dtf(4, 1);
  auto b = random_dtf(4, 2);
  b.roi_labels[2] = "other";
  EXPECT_FCPRED_ERROR(diff_features(a, b), ErrorCode::kLabelMismatch);
  EXPECT_FCPRED_ERROR(diff_features(a, random_dtf(3, 2)), ErrorCode::kShapeMismatch);
  EXPECT_FCPRED_ERROR(diff_features(a, random_pli(4, 2)), ErrorCode::kShapeMismatch);
}

TEST(Dataset, AssembleAndSubset) {
  PlantedCohort spec;
  spec.n_subjects = 10;
  spec.rois = 4;
  spec.informative = {{0, 1}};
  spec.effects = {0.2};
  const Cohort cohort = gen_cohort(spec);
  const Dataset d = assemble_dataset(cohort.subjects);
  EXPECT_EQ(d.rows(), 10);
  EXPECT_EQ(d.features(), 16);
  EXPECT_EQ(d.subject_ids.front(), "S001");
  const Dataset s = d.subset({3, 1});
  EXPECT_EQ(s.X.row(0), d.X.row(3));
  EXPECT_EQ(s.y(1), d.y(1));
  EXPECT_EQ(s.subject_ids, (std::vector<std::string>{d.subject_ids[3], d.subject_ids[1]}));
}

TEST(Dataset, AssembleRejectsBadInputs) {
  std::vector<SubjectSessions> subjects{{"a", random_dtf(3, 1), random_dtf(3, 2), 1.0}};
  EXPECT_FCPRED_ERROR(assemble_dataset(subjects), ErrorCode::kInsufficientSamples);
  subjects.push_back({"b", random_dtf(3, 3), random_dtf(3, 4), std::nan("")});
  EXPECT_FCPRED_ERROR(assemble_dataset(subjects), ErrorCode::kInvalidArgument);
  subjects.back() = {"b", random_dtf(4, 3), random_dtf(4, 4), 2.0};
  EXPECT_FCPRED_ERROR(assemble_dataset(subjects), ErrorCode::kShapeMismatch);
}

TEST(Dataset, CsvRoundTripIsExact) {
  const auto dir = testing::scratch_dir("dataset_rt");
  PlantedCohort spec;
  spec.n_subjects = 7;
  spec.rois = 5;
  spec.metric = Metric::kPli;
  spec.informative = {{1, 3}};
  spec.effects = {0.3};
  const Dataset d = assemble_dataset(gen_cohort(spec).subjects);
  write_dataset(d, dir / "d.csv");
  const Dataset back = read_dataset(dir / "d.csv");
  EXPECT_EQ(back.X, d.X);
  EXPECT_EQ(back.y, d.y);
  EXPECT_EQ(back.subject_ids, d.subject_ids);
  EXPECT_EQ(back.meta.index_map, d.meta.index_map);
  EXPECT_EQ(back.meta.roi_labels, d.meta.roi_labels);
  EXPECT_EQ(back.meta.metric, Metric::kPli);
}

TEST(Dataset, ReadRejectsMalformedCsv) {
  const auto dir = testing::scratch_dir("dataset_bad");
  PlantedCohort spec;
  spec.n_subjects = 3;
  spec.rois = 3;
  spec.informative = {{0, 1}};
  spec.effects = {0.2};
  write_dataset(assemble_dataset(gen_cohort(spec).subjects), dir / "d.csv");
  std::string text = io::read_text(dir / "d.csv");
  text.replace(text.rfind(','), 1, ",x");
  io::write_text(dir / "d.csv", text);
  EXPECT_FCPRED_ERROR(read_dataset(dir / "d.csv"), ErrorCode::kParse);
  EXPECT_FCPRED_ERROR(read_dataset(dir / "missing.csv"), ErrorCode::kIo);
}

TEST(ConnectivityIo, JsonRoundTripIsExact) {
  const auto dir = testing::scratch_dir("conn_rt");
  for (const auto& m : {random_dtf(6, 9), random_pli(6, 9)}) {
    write_connectivity(m, dir / "m.json");
    const auto back = read_connectivity(dir / "m.json");
    EXPECT_EQ(back.values, m.values);
    EXPECT_EQ(back.metric, m.metric);
    EXPECT_EQ(back.roi_labels, m.roi_labels);
    EXPECT_EQ(back.band_hz, m.band_hz);
  }
}

TEST(ConnectivityValidate, CatchesInvariantViolations) {
  auto d = random_dtf(3, 1);
  d.validate();
  d.values(0, 0) += 0.1;
  EXPECT_FCPRED_ERROR(d.validate(), ErrorCode::kDegenerate);
  auto p = random_pli(3, 1);
  p.validate();
  p.values(0, 1) += 0.1;
  EXPECT_FCPRED_ERROR(p.validate(), ErrorCode::kDegenerate);
}

TEST(RecordingIo, RoundTripIsExact) {
  const auto dir = testing::scratch_dir("rec_rt");
  const Eigen::MatrixXd x = testing::random_matrix(3, 257, 11) * 1e-5;
  MultichannelRecording rec(x, 250.0, {"Fz", "Cz", "Pz"});
  write_recording(rec, dir / "r.csv");
  const auto back = read_recording(dir / "r.csv");
  EXPECT_EQ(back.samples(), rec.samples());
  EXPECT_EQ(back.rate_hz(), 250.0);
  EXPECT_EQ(back.labels(), rec.labels());
  EXPECT_EQ(read_recording_rate(dir / "r.csv"), 250.0);
}

TEST(TargetingRmse, MatchesHandComputation) {
  TrackingTrace t;
  t.cursor = {{0, 0}, {3, 4}, {1, 1}};
  t.target = {{0, 0}, {0, 0}, {1, 1}};
  EXPECT_DOUBLE_EQ(targeting_rmse(t), std::sqrt(25.0 / 3.0));
  t.target.pop_back();
  EXPECT_FCPRED_ERROR(targeting_rmse(t), ErrorCode::kShapeMismatch);
  EXPECT_FCPRED_ERROR(targeting_rmse(TrackingTrace{}), ErrorCode::kEmptyInput);
}

TEST(TargetingRmse, ReadsTraceCsv) {
  const auto dir = testing::scratch_dir("trace");
  io::write_text(dir / "t.csv", "cursor_x,cursor_y,target_x,target_y\n1,1,0,1\n2,2,2,2\n");
  EXPECT_DOUBLE_EQ(targeting_rmse(read_tracking_trace(dir / "t.csv")), std::sqrt(0.5));
}

TEST(IoUtil, DoubleFormattingRoundTrips) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-300.0, 300.0));
    EXPECT_EQ(io::parse_double(io::format_double(v), "t"), v);
  }
  EXPECT_FCPRED_ERROR(io::parse_double("1.5x", "t"), ErrorCode::kParse);
}

}  // namespace
}  // namespace fcpred
