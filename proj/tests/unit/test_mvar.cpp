#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fcpred/mvar.hpp"
#include "fcpred/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace fcpred {
namespace {

PlantedMvar scalar_ar1(double a, std::uint64_t seed) {
  PlantedMvar pm;
  pm.coeffs = {Eigen::MatrixXd::Constant(1, 1, a)};
  pm.noise_cov = Eigen::MatrixXd::Identity(1, 1);
  pm.rate_hz = 100.0;
  pm.seed = seed;
  return pm;
}

TEST(FitMvar, RecoversScalarAr1) {
  const auto rec = gen_mvar_signal(scalar_ar1(0.5, 11), 10000);
  const MvarModel m = fit_mvar(rec, 1);
  EXPECT_NEAR(m.coeffs[0](0, 0), 0.5, 0.03);
  EXPECT_NEAR(m.noise_cov(0, 0), 1.0, 0.05);
  EXPECT_TRUE(m.stable());
}

TEST(FitMvar, WhiteNoiseHasNearZeroCoefficients) {
  const Eigen::MatrixXd x = testing::random_matrix(3, 10000, 12);
  const MvarModel m = fit_mvar(MultichannelRecording(x, 100.0, default_labels(3)), 2);
  for (const auto& A : m.coeffs) EXPECT_LT(A.cwiseAbs().maxCoeff(), 0.05);
}

TEST(FitMvar, NoiselessRecurrenceHasZeroResidual) {
  // x_t = 0.9 x_{t-1} - 0.5 x_{t-2}, started from a nonzero state.
  Eigen::MatrixXd x(1, 400);
  x(0, 0) = 1.0;
  x(0, 1) = 0.3;
  for (int t = 2; t < 400; ++t) x(0, t) = 0.9 * x(0, t - 1) - 0.5 * x(0, t - 2);
  const MvarModel m = fit_mvar(MultichannelRecording(x, 100.0, default_labels(1)), 2);
  EXPECT_LT(std::abs(m.noise_cov(0, 0)), 1e-16);
  EXPECT_NEAR(m.coeffs[0](0, 0), 0.9, 1e-9);
  EXPECT_NEAR(m.coeffs[1](0, 0), -0.5, 1e-9);
}

TEST(FitMvar, InsufficientSamples) {
  const Eigen::MatrixXd x = testing::random_matrix(4, 10, 1);
  EXPECT_FCPRED_ERROR(fit_mvar(MultichannelRecording(x, 100.0, default_labels(4)), 2),
                      ErrorCode::kInsufficientSamples);
}

TEST(FitMvar, CollinearChannelsAreNamed) {
  Eigen::MatrixXd x = testing::random_matrix(3, 500, 2);
  x.row(2) = 2.0 * x.row(0);
  MultichannelRecording rec(x, 100.0, {"Fz", "Cz", "Pz"});
  try {
    fit_mvar(rec, 1);
    FAIL() << "expected singular fit";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularFit);
    const std::string msg = e.what();
    EXPECT_TRUE(msg.find("Pz") != std::string::npos || msg.find("Fz") != std::string::npos)
        << msg;
    EXPECT_EQ(msg.find("Cz"), std::string::npos) << msg;
  }
}

TEST(SelectOrder, RecoversPlantedOrderTwo) {
  PlantedMvar pm;
  Eigen::MatrixXd A1(2, 2), A2(2, 2);
  A1 << 0.3, 0.0, 0.0, 0.2;
  A2 << -0.5, 0.0, 0.6, -0.4;
  pm.coeffs = {A1, A2};
  pm.noise_cov = Eigen::MatrixXd::Identity(2, 2);
  pm.rate_hz = 128.0;
  pm.seed = 3;
  const auto rec = gen_mvar_signal(pm, 10000);
  EXPECT_EQ(select_order(rec, 8, OrderCriterion::kBic), 2);
}

TEST(SelectOrder, SingleCandidate) {
  const Eigen::MatrixXd x = testing::random_matrix(2, 300, 4);
  EXPECT_EQ(select_order(MultichannelRecording(x, 100.0, default_labels(2)), 1,
                         OrderCriterion::kBic),
            1);
}

TEST(SelectOrder, WhiteNoisePicksOrderOne) {
  const Eigen::MatrixXd x = testing::random_matrix(2, 5000, 5);
  const MultichannelRecording rec(x, 100.0, default_labels(2));
  const auto crit = order_criteria(rec, 6, OrderCriterion::kBic);
  ASSERT_EQ(crit.size(), 6U);
  // Oracle: BIC(p) = ln det(Sigma_p) + ln(N) * p R^2 / N on the common sample.
  const int N = 5000 - 6;
  for (int p = 1; p <= 6; ++p) {
    Eigen::MatrixXd Y = x.rightCols(N);
    Eigen::MatrixXd Z(2 * p, N);
    for (int k = 1; k <= p; ++k) Z.middleRows(2 * (k - 1), 2) = x.middleCols(6 - k, N);
    const Eigen::MatrixXd B = (Y * Z.transpose()) * (Z * Z.transpose()).inverse();
    const Eigen::MatrixXd E = Y - B * Z;
    const Eigen::MatrixXd S = E * E.transpose() / N;
    const double bic = std::log(S.determinant()) + std::log(N) * p * 4.0 / N;
    EXPECT_NEAR(crit[p - 1], bic, 1e-6) << "p = " << p;
  }
  EXPECT_EQ(select_order(rec, 6, OrderCriterion::kBic), 1);
}

TEST(TransferFunction, ZeroCoefficientsGiveIdentity) {
  const MvarModel m = make_mvar_model({Eigen::MatrixXd::Zero(3, 3)},
                                      Eigen::MatrixXd::Identity(3, 3), 100.0);
  const std::vector<double> freqs{0.0, 10.0, 50.0};
  const auto tf = transfer_function(m, freqs);
  for (const auto& H : tf.H) EXPECT_LT((H - Eigen::MatrixXcd::Identity(3, 3)).norm(), 1e-15);
}

TEST(TransferFunction, ScalarAr1AtDc) {
  const MvarModel m = make_mvar_model({Eigen::MatrixXd::Constant(1, 1, 0.5)},
                                      Eigen::MatrixXd::Identity(1, 1), 37.0);
  const std::vector<double> freqs{0.0};
  EXPECT_NEAR(std::abs(transfer_function(m, freqs).H[0](0, 0) - 2.0), 0.0, 1e-14);
}

TEST(TransferFunction, TriangularSystemHasNoBackwardPath) {
  const PlantedMvar pm = unidirectional_pair(0.9);
  const auto freqs = frequency_grid(0.0, 64.0, 0.25);
  const auto tf = transfer_function(pm.model(), freqs);
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    EXPECT_LT(std::abs(tf.H[i](0, 1)), 1e-15);
    const auto oracle = testing::mvar_transfer(pm.coeffs, freqs[i], pm.rate_hz);
    EXPECT_LT((tf.H[i] - oracle).norm(), 1e-12);
  }
}

TEST(TransferFunction, RejectsFrequencyAboveNyquist) {
  const PlantedMvar pm = unidirectional_pair(0.5);
  const std::vector<double> freqs{65.0};
  EXPECT_FCPRED_ERROR(transfer_function(pm.model(), freqs), ErrorCode::kRange);
}

TEST(TransferFunction, SingularSpectrumNamesFrequency) {
  // A(0) = 1 - 1 = 0 for a unit root.
  const MvarModel m = make_mvar_model({Eigen::MatrixXd::Constant(1, 1, 1.0)},
                                      Eigen::MatrixXd::Identity(1, 1), 10.0);
  const std::vector<double> freqs{0.0};
  EXPECT_FCPRED_ERROR(transfer_function(m, freqs), ErrorCode::kSingularSpectrum);
}

TEST(Dtf, RowsAreStochasticPerFrequency) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PlantedMvar pm = random_stable_mvar(2 + static_cast<int>(seed % 5), 1 + seed % 3, seed);
    const auto spec = dtf_spectrum(pm.model(), frequency_grid());
    for (const auto& G : spec) {
      EXPECT_LT((G.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
      EXPECT_GE(G.minCoeff(), 0.0);
      EXPECT_LE(G.maxCoeff(), 1.0 + 1e-12);
    }
  }
}

TEST(Dtf, MatchesOracleFromTransferFunction) {
  const PlantedMvar pm = random_stable_mvar(4, 2, 77);
  const auto freqs = frequency_grid(8.0, 13.0, 0.5);
  const auto got = dtf(pm.model(), freqs, {8.0, 13.0});
  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(4, 4);
  for (double f : freqs) {
    const auto H = testing::mvar_transfer(pm.coeffs, f, pm.rate_hz);
    const Eigen::MatrixXd P = H.cwiseAbs2();
    for (int a = 0; a < 4; ++a) want.row(a) += P.row(a) / P.row(a).sum();
  }
  want /= static_cast<double>(freqs.size());
  EXPECT_LT((got.values - want).cwiseAbs().maxCoeff(), 1e-12);
  got.validate();
}

TEST(Dtf, DiagonalSystemIsDiagonal) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
  A.diagonal() << 0.5, -0.3, 0.8;
  PlantedMvar pm;
  pm.coeffs = {A};
  pm.noise_cov = Eigen::MatrixXd::Identity(3, 3);
  pm.rate_hz = 128.0;
  const auto exact = analytic_dtf(pm, frequency_grid(), {1.0, 45.0});
  EXPECT_EQ((exact.values - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.0);

  pm.seed = 21;
  const auto est = dtf(fit_mvar(gen_mvar_signal(pm, 20000), 1), frequency_grid(), {1.0, 45.0});
  Eigen::MatrixXd off = est.values;
  off.diagonal().setZero();
  EXPECT_LT(off.maxCoeff(), 0.02);
}

TEST(Dtf, UnidirectionalCouplingDirection) {
  const PlantedMvar pm = unidirectional_pair(0.9, 0.5, 128.0, 5);
  const auto exact = analytic_dtf(pm, frequency_grid(), {1.0, 45.0});
  EXPECT_GT(exact.values(1, 0), 0.4);
  EXPECT_LT(exact.values(0, 1), 1e-30);
  const auto est = dtf(fit_mvar(gen_mvar_signal(pm, 10000), 1), frequency_grid(), {1.0, 45.0});
  EXPECT_GT(est.values(1, 0), 0.4);
  EXPECT_LT(est.values(0, 1), 0.02);
}

TEST(Dtf, ScaleInvariant) {
  const PlantedMvar pm = random_stable_mvar(3, 2, 8);
  const auto rec = gen_mvar_signal(pm, 4000);
  const auto freqs = frequency_grid();
  const auto a = dtf(fit_mvar(rec, 2), freqs, {1.0, 45.0});
  const auto b = dtf(fit_mvar(rec.with_samples(rec.samples() * 37.5), 2), freqs, {1.0, 45.0});
  EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Dtf, PermutationEquivariant) {
  const PlantedMvar pm = random_stable_mvar(4, 1, 9);
  const auto rec = gen_mvar_signal(pm, 4000);
  const std::vector<int> perm{2, 0, 3, 1};
  Eigen::MatrixXd permuted(4, rec.length());
  for (int i = 0; i < 4; ++i) permuted.row(i) = rec.samples().row(perm[i]);
  const auto freqs = frequency_grid();
  const auto a = dtf(fit_mvar(rec, 1), freqs, {1.0, 45.0});
  const auto b = dtf(fit_mvar(MultichannelRecording(permuted, rec.rate_hz(), default_labels(4)), 1),
                     freqs, {1.0, 45.0});
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(b.values(i, j), a.values(perm[i], perm[j]), 1e-9);
  }
}

TEST(Dtf, BandOutsideGrid) {
  const PlantedMvar pm = unidirectional_pair(0.5);
  const std::vector<double> freqs{1.0, 2.0};
  EXPECT_FCPRED_ERROR(dtf(pm.model(), freqs, {10.0, 20.0}), ErrorCode::kRange);
  EXPECT_FCPRED_ERROR(dtf(pm.model(), freqs, {1.0, 100.0}), ErrorCode::kRange);
}

TEST(Dtf, NamedBands) {
  EXPECT_EQ(named_band("alpha"), (std::pair{8.0, 13.0}));
  EXPECT_EQ(named_band("broadband"), (std::pair{1.0, 45.0}));
  EXPECT_FCPRED_ERROR(named_band("kappa"), ErrorCode::kInvalidSpec);
  const auto grid = frequency_grid();
  EXPECT_EQ(grid.size(), 89U);
  EXPECT_EQ(grid.front(), 1.0);
  EXPECT_EQ(grid.back(), 45.0);
}

TEST(MvarModel, Invariants) {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.5, 0.4, 1.0;
  EXPECT_FCPRED_ERROR(make_mvar_model({Eigen::MatrixXd::Zero(2, 2)}, cov, 10.0),
                      ErrorCode::kInvalidArgument);
  cov << 1.0, 2.0, 2.0, 1.0;  // indefinite
  EXPECT_FCPRED_ERROR(make_mvar_model({Eigen::MatrixXd::Zero(2, 2)}, cov, 10.0),
                      ErrorCode::kInvalidArgument);
  EXPECT_FCPRED_ERROR(make_mvar_model({Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 3)},
                                      Eigen::MatrixXd::Identity(2, 2), 10.0),
                      ErrorCode::kShapeMismatch);
  const MvarModel unstable = make_mvar_model({Eigen::MatrixXd::Constant(1, 1, 1.2)},
                                             Eigen::MatrixXd::Identity(1, 1), 10.0);
  EXPECT_FALSE(unstable.stable());
  EXPECT_NEAR(unstable.spectral_radius, 1.2, 1e-12);
}

}  // namespace
}  // namespace fcpred
