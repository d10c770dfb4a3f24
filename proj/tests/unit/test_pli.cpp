#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fcpred/pli.hpp"
#include "fcpred/synth.hpp"
#include "test_util.hpp"

namespace fcpred {
namespace {

using std::numbers::pi;
using testing::rows_to_recording;
using testing::sinusoid;

TEST(AnalyticSignal, CosinePhaseSlope) {
  const double fs = 256.0;
  const long n = 2048;
  const auto rec = rows_to_recording({sinusoid(8.0, fs, n, pi / 2.0)}, fs);
  const PhaseSeries ph = analytic_phase(rec);
  // Unwrap, then least-squares slope over the central 80%.
  const long b = n / 10, e = n - n / 10;
  std::vector<double> u(static_cast<std::size_t>(e - b));
  double offset = 0.0;
  for (long t = b; t < e; ++t) {
    if (t > b) {
      const double d = ph.phases(0, t) - ph.phases(0, t - 1);
      if (d < -pi) offset += 2.0 * pi;
      if (d > pi) offset -= 2.0 * pi;
    }
    u[t - b] = ph.phases(0, t) + offset;
  }
  double st = 0, su = 0, stt = 0, stu = 0;
  const double m = static_cast<double>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double t = static_cast<double>(i) / fs;
    st += t;
    su += u[i];
    stt += t * t;
    stu += t * u[i];
  }
  const double slope = (m * stu - st * su) / (m * stt - st * st);
  EXPECT_NEAR(slope, 2.0 * pi * 8.0, 0.01 * 2.0 * pi * 8.0);
}

TEST(AnalyticSignal, SineLagsCosineByQuarterCycle) {
  const double fs = 256.0;
  const long n = 2048;
  const auto rec = rows_to_recording({sinusoid(8.0, fs, n, pi / 2.0), sinusoid(8.0, fs, n)}, fs);
  const PhaseSeries ph = analytic_phase(rec);
  for (long t = n / 10; t < n - n / 10; ++t) {
    EXPECT_NEAR(wrap_phase(ph.phases(0, t) - ph.phases(1, t)), pi / 2.0, 1e-3);
  }
}

TEST(AnalyticSignal, NegationShiftsPhaseByPi) {
  const Eigen::MatrixXd x = testing::random_matrix(1, 512, 3);
  Eigen::MatrixXd both(2, 512);
  both.row(0) = x.row(0);
  both.row(1) = -x.row(0);
  const PhaseSeries ph = analytic_phase(MultichannelRecording(both, 100.0, default_labels(2)));
  for (long t = 0; t < 512; ++t) {
    EXPECT_NEAR(std::abs(wrap_phase(ph.phases(0, t) - ph.phases(1, t))), pi, 1e-9);
  }
}

TEST(AnalyticSignal, MatchesNaiveDftConstruction) {
  const Eigen::VectorXd x = testing::random_vector(37, 4);
  const auto z = analytic_signal(std::span<const double>(x.data(), 37));
  const int n = 37;
  for (int t = 0; t < n; ++t) {
    std::complex<double> acc = 0.0;
    for (int k = 0; k < n; ++k) {
      std::complex<double> X = 0.0;
      for (int s = 0; s < n; ++s) X += x(s) * std::polar(1.0, -2.0 * pi * k * s / n);
      const double h = k == 0 ? 1.0 : (k <= n / 2 ? 2.0 : 0.0);
      acc += h * X * std::polar(1.0, 2.0 * pi * k * t / n);
    }
    acc /= n;
    EXPECT_NEAR(std::abs(z(t) - acc), 0.0, 1e-10);
    EXPECT_NEAR(z(t).real(), x(t), 1e-12);
  }
}

TEST(AnalyticPhase, ConstantChannelIsDegenerate) {
  Eigen::MatrixXd x = testing::random_matrix(2, 64, 1);
  x.row(1).setConstant(4.0);
  EXPECT_FCPRED_ERROR(analytic_phase(MultichannelRecording(x, 100.0, default_labels(2))),
                      ErrorCode::kDegenerate);
  EXPECT_FCPRED_ERROR(analytic_phase(MultichannelRecording(x.leftCols(3), 100.0,
                                                            default_labels(2))),
                      ErrorCode::kInsufficientSamples);
}

TEST(PhaseSign, RepudiatesZeroAndPi) {
  EXPECT_EQ(phase_sign(0.0), 0);
  EXPECT_EQ(phase_sign(pi), 0);
  EXPECT_EQ(phase_sign(-pi), 0);
  EXPECT_EQ(phase_sign(0.3), 1);
  EXPECT_EQ(phase_sign(-0.3), -1);
  EXPECT_NEAR(wrap_phase(3.0 * pi / 2.0), -pi / 2.0, 1e-15);
  EXPECT_EQ(wrap_phase(-pi), pi);
}

TEST(Pli, IdenticalChannelsGiveExactZero) {
  const Eigen::MatrixXd x = testing::random_matrix(1, 1000, 5);
  Eigen::MatrixXd both(2, 1000);
  both << x, x;
  const auto m = pli_matrix(MultichannelRecording(both, 100.0, default_labels(2)));
  EXPECT_EQ(m.values(0, 1), 0.0);
  EXPECT_EQ(m.values(1, 0), 0.0);
}

TEST(Pli, QuarterPeriodLagIsNearOne) {
  const double fs = 256.0;
  const auto rec = rows_to_recording({sinusoid(8.0, fs, 4096), sinusoid(8.0, fs, 4096, -pi / 2.0)}, fs);
  EXPECT_GT(pli_matrix(rec).values(0, 1), 0.98);
}

TEST(Pli, IndependentNoiseIsSmall) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto rec = gen_phase_locked(10.0, 0.0, 0.0, 10000, 256.0, seed);
    EXPECT_LT(pli_matrix(rec).values(0, 1), 0.1);
  }
}

TEST(Pli, SymmetricBoundedZeroDiagonal) {
  const Eigen::MatrixXd x = testing::random_matrix(5, 2000, 6);
  const auto m = pli_matrix(MultichannelRecording(x, 100.0, default_labels(5)));
  EXPECT_EQ(m.values, m.values.transpose());
  EXPECT_EQ(m.values.diagonal().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GE(m.values.minCoeff(), 0.0);
  EXPECT_LE(m.values.maxCoeff(), 1.0);
  m.validate();
}

TEST(Pli, GrowsWithPhaseOffset) {
  const double fs = 256.0;
  double prev = 0.0;
  for (double c : {0.0, 0.1, 0.5, 1.0}) {
    const auto rec = rows_to_recording({sinusoid(8.0, fs, 4096), sinusoid(8.0, fs, 4096, c)}, fs);
    const double v = pli_matrix(rec).values(0, 1);
    if (c == 0.0) {
      EXPECT_EQ(v, 0.0);
    } else {
      EXPECT_GE(v, prev);
    }
    prev = v;
  }
  EXPECT_GT(prev, 0.98);
}

TEST(Pli, ZeroLagMixingStaysSmall) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto rec = gen_mixed_sources(3, 4, 10000, 256.0, seed);
    const auto m = pli_matrix(rec);
    EXPECT_LT(m.values.maxCoeff(), 0.1) << "seed " << seed;
  }
}

TEST(Pli, NeedsTwoChannels) {
  const Eigen::MatrixXd x = testing::random_matrix(1, 100, 1);
  EXPECT_FCPRED_ERROR(pli_matrix(MultichannelRecording(x, 100.0, default_labels(1))),
                      ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace fcpred
