#include "fcpred/mvar.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fcpred/error.hpp"

namespace fcpred {
namespace {

constexpr double kRankThreshold = 1e-10;

// Pivot positions past the numerical rank of the channel data identify the
// channels expressible through the others.
std::string collinear_channels(const MultichannelRecording& series) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(series.samples().transpose());
  qr.setThreshold(kRankThreshold);
  std::ostringstream out;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index i = qr.rank(); i < perm.size(); ++i) {
    if (i > qr.rank()) out << ", ";
    out << series.labels()[perm[i]];
  }
  return out.str();
}

struct LagSystem {
  Eigen::MatrixXd regressors;  // N x (R p)
  Eigen::MatrixXd targets;     // N x R
};

LagSystem build_lag_system(const Eigen::MatrixXd& x, int p) {
  const Eigen::Index r = x.rows();
  const Eigen::Index n = x.cols() - p;
  LagSystem sys{Eigen::MatrixXd(n, r * p), Eigen::MatrixXd(n, r)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index t = i + p;
    sys.targets.row(i) = x.col(t).transpose();
    for (int k = 1; k <= p; ++k) {
      sys.regressors.block(i, (k - 1) * r, 1, r) = x.col(t - k).transpose();
    }
  }
  return sys;
}

double log_det_psd(const Eigen::MatrixXd& m) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = ldlt.vectorD()(i);
    if (!(d > 0.0)) return -std::numeric_limits<double>::infinity();
    acc += std::log(d);
  }
  return acc;
}

}  // namespace

double companion_spectral_radius(const std::vector<Eigen::MatrixXd>& coeffs) {
  if (coeffs.empty()) return 0.0;
  const Eigen::Index r = coeffs.front().rows();
  const Eigen::Index p = static_cast<Eigen::Index>(coeffs.size());
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(r * p, r * p);
  for (Eigen::Index k = 0; k < p; ++k) companion.block(0, k * r, r, r) = coeffs[k];
  if (p > 1) companion.block(r, 0, r * (p - 1), r * (p - 1)).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

MvarModel make_mvar_model(std::vector<Eigen::MatrixXd> coeffs, Eigen::MatrixXd noise_cov,
                          double rate_hz, std::vector<std::string> labels) {
  require(!coeffs.empty(), ErrorCode::kInvalidArgument, "MVAR order must be >= 1");
  const Eigen::Index r = coeffs.front().rows();
  require(r > 0, ErrorCode::kInvalidArgument, "MVAR needs at least one channel");
  for (const auto& a : coeffs) {
    require(a.rows() == r && a.cols() == r, ErrorCode::kShapeMismatch,
            "all MVAR coefficient matrices must be R x R");
    require(a.allFinite(), ErrorCode::kInvalidArgument, "MVAR coefficients not finite");
  }
  require(noise_cov.rows() == r && noise_cov.cols() == r, ErrorCode::kShapeMismatch,
          "noise covariance must be R x R");
  require((noise_cov - noise_cov.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
          ErrorCode::kInvalidArgument, "noise covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(noise_cov, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -1e-10, ErrorCode::kInvalidArgument,
          "noise covariance not positive semidefinite");
  require(rate_hz > 0.0, ErrorCode::kInvalidArgument, "rate must be positive");
  if (labels.empty()) labels = default_labels(r);
  require(static_cast<Eigen::Index>(labels.size()) == r, ErrorCode::kLabelMismatch,
          "label count does not match MVAR dimension");

  MvarModel m;
  m.spectral_radius = companion_spectral_radius(coeffs);
  m.coeffs = std::move(coeffs);
  m.noise_cov = std::move(noise_cov);
  m.rate_hz = rate_hz;
  m.labels = std::move(labels);
  return m;
}

MvarModel fit_mvar(const MultichannelRecording& series, int order) {
  require(order >= 1, ErrorCode::kInvalidArgument, "MVAR order must be >= 1");
  const Eigen::Index r = series.channels();
  const Eigen::Index t = series.length();
  const Eigen::Index unknowns = r * order;
  if (t - order <= unknowns) {
    throw Error(ErrorCode::kInsufficientSamples,
                std::to_string(t) + " samples are too few for an order-" +
                    std::to_string(order) + " model of " + std::to_string(r) +
                    " channels");
  }

  const LagSystem sys = build_lag_system(series.samples(), order);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys.regressors);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < unknowns) {
    std::string which = collinear_channels(series);
    if (which.empty()) which = "lagged regressors";
    throw Error(ErrorCode::kSingularFit, "rank-deficient MVAR regressors; collinear: " + which);
  }
  const Eigen::MatrixXd b = qr.solve(sys.targets);
  const Eigen::MatrixXd resid = sys.targets - sys.regressors * b;
  const auto n = static_cast<double>(sys.targets.rows());
  Eigen::MatrixXd cov = (resid.transpose() * resid) / n;
  cov = 0.5 * (cov + cov.transpose()).eval();

  std::vector<Eigen::MatrixXd> coeffs;
  coeffs.reserve(static_cast<std::size_t>(order));
  for (int k = 0; k < order; ++k) {
    coeffs.push_back(b.block(k * r, 0, r, r).transpose());
  }
  return make_mvar_model(std::move(coeffs), std::move(cov), series.rate_hz(),
                         series.labels());
}

std::vector<double> order_criteria(const MultichannelRecording& series, int max_p,
                                   OrderCriterion criterion) {
  require(max_p >= 1, ErrorCode::kInvalidArgument, "max_p must be >= 1");
  const Eigen::Index t = series.length();
  const auto r = static_cast<double>(series.channels());
  require(t > max_p, ErrorCode::kInsufficientSamples, "series shorter than max_p");
  const auto n = static_cast<double>(t - max_p);

  std::vector<double> values;
  for (int p = 1; p <= max_p; ++p) {
    const auto sub = series.with_samples(series.samples().middleCols(max_p - p, t - max_p + p));
    const MvarModel m = fit_mvar(sub, p);
    const double params = static_cast<double>(p) * r * r;
    const double penalty =
        criterion == OrderCriterion::kBic ? std::log(n) * params / n : 2.0 * params / n;
    values.push_back(log_det_psd(m.noise_cov) + penalty);
  }
  return values;
}

int select_order(const MultichannelRecording& series, int max_p, OrderCriterion criterion) {
  const auto values = order_criteria(series, max_p, criterion);
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best + 1;
}

SpectralTransfer transfer_function(const MvarModel& model, std::span<const double> freqs_hz) {
  const Eigen::Index r = model.channels();
  const double nyquist = model.rate_hz / 2.0;
  SpectralTransfer out;
  out.freqs_hz.assign(freqs_hz.begin(), freqs_hz.end());
  out.H.reserve(freqs_hz.size());
  for (const double f : freqs_hz) {
    require(f >= 0.0 && f <= nyquist, ErrorCode::kRange,
            "frequency " + std::to_string(f) + " Hz outside [0, nyquist]");
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(r, r);
    for (int k = 1; k <= model.order(); ++k) {
      const std::complex<double> phase =
          std::polar(1.0, -2.0 * std::numbers::pi * f * k / model.rate_hz);
      a -= model.coeffs[k - 1].cast<std::complex<double>>() * phase;
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    if (!(lu.rcond() > 1e-13)) {
      throw Error(ErrorCode::kSingularSpectrum,
                  "A(f) is singular at " + std::to_string(f) + " Hz");
    }
    out.H.push_back(lu.inverse());
    require(out.H.back().allFinite(), ErrorCode::kSingularSpectrum,
            "H(f) not finite at " + std::to_string(f) + " Hz");
  }
  return out;
}

std::vector<Eigen::MatrixXd> dtf_spectrum(const MvarModel& model,
                                          std::span<const double> freqs_hz) {
  const SpectralTransfer tf = transfer_function(model, freqs_hz);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(tf.H.size());
  for (std::size_t i = 0; i < tf.H.size(); ++i) {
    Eigen::MatrixXd power = tf.H[i].cwiseAbs2();
    for (Eigen::Index a = 0; a < power.rows(); ++a) {
      const double row = power.row(a).sum();
      if (!(row > 0.0)) {
        throw Error(ErrorCode::kDegenerate, "zero inflow power into channel " +
                                                std::to_string(a) + " at " +
                                                std::to_string(tf.freqs_hz[i]) + " Hz");
      }
      power.row(a) /= row;
    }
    out.push_back(std::move(power));
  }
  return out;
}

ConnectivityMatrix dtf(const MvarModel& model, std::span<const double> freqs_hz,
                       std::pair<double, double> band) {
  const auto [lo, hi] = band;
  require(lo >= 0.0 && lo <= hi && hi <= model.rate_hz / 2.0, ErrorCode::kRange,
          "DTF band must lie within [0, nyquist]");
  constexpr double kEdge = 1e-9;
  std::vector<double> inside;
  for (const double f : freqs_hz) {
    if (f >= lo - kEdge && f <= hi + kEdge) inside.push_back(f);
  }
  require(!inside.empty(), ErrorCode::kRange, "no frequency samples inside the DTF band");

  const auto spectrum = dtf_spectrum(model, inside);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(model.channels(), model.channels());
  for (const auto& g : spectrum) mean += g;
  mean /= static_cast<double>(spectrum.size());
  return ConnectivityMatrix{std::move(mean), Metric::kDtf, model.labels, band};
}

std::vector<double> frequency_grid(double lo_hz, double hi_hz, double step_hz) {
  require(step_hz > 0.0 && lo_hz <= hi_hz, ErrorCode::kInvalidArgument,
          "frequency grid needs lo <= hi and positive step");
  std::vector<double> out;
  for (long i = 0;; ++i) {
    const double f = lo_hz + static_cast<double>(i) * step_hz;
    if (f > hi_hz + 1e-9 * step_hz) break;
    out.push_back(f);
  }
  return out;
}

std::pair<double, double> named_band(const std::string& name) {
  if (name == "delta") return {1.0, 4.0};
  if (name == "theta") return {4.0, 8.0};
  if (name == "alpha") return {8.0, 13.0};
  if (name == "beta") return {13.0, 30.0};
  if (name == "gamma") return {30.0, 45.0};
  if (name == "broadband") return {1.0, 45.0};
  throw Error(ErrorCode::kInvalidSpec, "unknown band '" + name + "'");
}

}  // namespace fcpred
