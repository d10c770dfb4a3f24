#include "fcpred/pli.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "fcpred/error.hpp"

namespace fcpred {
namespace {

// FFTW planning is not thread safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Eigen::VectorXcd analytic_signal(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  require(n >= 1, ErrorCode::kEmptyInput, "analytic signal of empty series");
  Eigen::VectorXcd buf(n);
  for (int i = 0; i < n; ++i) buf(i) = x[i];

  auto* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan fwd, inv;
  {
    std::lock_guard lock(planner_mutex());
    fwd = fftw_plan_dft_1d(n, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    inv = fftw_plan_dft_1d(n, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(fwd);
  // h = [1, 2, ..., 2, (1 if n even), 0, ..., 0]
  const int half = n / 2;
  for (int k = 1; k < n; ++k) {
    if (k < (n + 1) / 2) {
      buf(k) *= 2.0;
    } else if (!(n % 2 == 0 && k == half)) {
      buf(k) = 0.0;
    }
  }
  fftw_execute(inv);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  buf /= static_cast<double>(n);
  return buf;
}

double wrap_phase(double x) {
  constexpr double pi = std::numbers::pi;
  double w = std::remainder(x, 2.0 * pi);  // [-pi, pi]
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

int phase_sign(double d) {
  if (d == 0.0 || std::abs(d) == std::numbers::pi) return 0;
  return d > 0.0 ? 1 : -1;
}

PhaseSeries analytic_phase(const MultichannelRecording& series) {
  require(series.length() >= 4, ErrorCode::kInsufficientSamples,
          "phase extraction needs at least 4 samples");
  PhaseSeries out{Eigen::MatrixXd(series.channels(), series.length()), series.rate_hz()};
  std::vector<double> row(static_cast<std::size_t>(series.length()));
  for (Eigen::Index c = 0; c < series.channels(); ++c) {
    const auto x = series.samples().row(c);
    const double mean = x.mean();
    const double sd = std::sqrt((x.array() - mean).square().mean());
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      throw Error(ErrorCode::kDegenerate,
                  "channel '" + series.labels()[c] + "' is constant; phase undefined");
    }
    for (Eigen::Index t = 0; t < series.length(); ++t) row[t] = x(t);
    const Eigen::VectorXcd z = analytic_signal(row);
    for (Eigen::Index t = 0; t < series.length(); ++t) {
      out.phases(c, t) = wrap_phase(std::arg(z(t)));
    }
  }
  return out;
}

ConnectivityMatrix pli_from_phases(const PhaseSeries& phases,
                                   const std::vector<std::string>& labels,
                                   const PliOptions& options) {
  const Eigen::Index r = phases.phases.rows();
  const Eigen::Index n = phases.phases.cols();
  require(r >= 2, ErrorCode::kInvalidArgument, "PLI needs at least two channels");
  require(options.edge_trim >= 0.0 && options.edge_trim < 0.5, ErrorCode::kInvalidSpec,
          "edge trim must be in [0, 0.5)");
  const auto trim = static_cast<Eigen::Index>(std::floor(options.edge_trim * n));
  const Eigen::Index begin = trim, end = n - trim;
  require(end > begin, ErrorCode::kInsufficientSamples, "no samples left after edge trim");

  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(r, r);
  for (Eigen::Index a = 0; a < r; ++a) {
    for (Eigen::Index b = a + 1; b < r; ++b) {
      long acc = 0;
      for (Eigen::Index t = begin; t < end; ++t) {
        acc += phase_sign(wrap_phase(phases.phases(a, t) - phases.phases(b, t)));
      }
      const double v = std::abs(static_cast<double>(acc)) / static_cast<double>(end - begin);
      values(a, b) = v;
      values(b, a) = v;
    }
  }
  return ConnectivityMatrix{std::move(values), Metric::kPli, labels, std::nullopt};
}

ConnectivityMatrix pli_matrix(const MultichannelRecording& series, const PliOptions& options) {
  require(series.channels() >= 2, ErrorCode::kInvalidArgument,
          "PLI needs at least two channels");
  return pli_from_phases(analytic_phase(series), series.labels(), options);
}

}  // namespace fcpred
