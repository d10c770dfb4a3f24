#include "fcpred/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "fcpred/error.hpp"
#include "fcpred/random.hpp"

namespace fcpred {
namespace {

// Stream ids for derive_seed.
enum : std::uint64_t {
  kStreamCoeffs = 1,
  kStreamNoise,
  kStreamDay1,
  kStreamDay10,
  kStreamTarget,
  kStreamResponse,
  kStreamBase,
};

Eigen::MatrixXd noise_factor(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

}  // namespace

std::vector<std::string> roi_labels(int count) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "roi%02d", i);
    out.emplace_back(buf);
  }
  return out;
}

MvarModel PlantedMvar::model() const {
  return make_mvar_model(coeffs, noise_cov, rate_hz, labels);
}

PlantedMvar random_stable_mvar(int channels, int order, std::uint64_t seed, double radius,
                               double rate_hz) {
  require(channels >= 1 && order >= 1, ErrorCode::kInvalidSpec,
          "need at least one channel and order >= 1");
  require(radius > 0.0 && radius < 1.0, ErrorCode::kUnstable,
          "target spectral radius must be in (0, 1)");
  Rng rng(derive_seed(seed, kStreamCoeffs));
  PlantedMvar pm;
  pm.rate_hz = rate_hz;
  pm.seed = seed;
  pm.noise_cov = Eigen::MatrixXd::Identity(channels, channels);
  for (int k = 0; k < order; ++k) {
    Eigen::MatrixXd A(channels, channels);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = rng.normal();
    pm.coeffs.push_back(std::move(A));
  }
  const double rho = companion_spectral_radius(pm.coeffs);
  require(rho > 0.0, ErrorCode::kDegenerate, "random coefficients have zero spectral radius");
  // Scaling A_k by c^k scales every companion eigenvalue by c.
  const double c = radius / rho;
  double ck = 1.0;
  for (auto& A : pm.coeffs) {
    ck *= c;
    A *= ck;
  }
  return pm;
}

PlantedMvar unidirectional_pair(double coupling, double self_weight, double rate_hz,
                                std::uint64_t seed) {
  PlantedMvar pm;
  Eigen::MatrixXd A(2, 2);
  A << self_weight, 0.0, coupling, self_weight;
  pm.coeffs = {A};
  pm.noise_cov = Eigen::MatrixXd::Identity(2, 2);
  pm.rate_hz = rate_hz;
  pm.seed = seed;
  require(companion_spectral_radius(pm.coeffs) < 1.0, ErrorCode::kUnstable,
          "unidirectional pair is unstable");
  return pm;
}

MultichannelRecording gen_mvar_signal(const PlantedMvar& planted, long n_samples) {
  const MvarModel model = planted.model();
  require(model.stable(), ErrorCode::kUnstable,
          "planted system is unstable (spectral radius " +
              std::to_string(model.spectral_radius) + ")");
  const int p = model.order();
  const long burn = 100L * p;
  require(n_samples > burn, ErrorCode::kInvalidSpec,
          "n_samples must exceed the burn-in of " + std::to_string(burn));
  const Eigen::Index R = model.channels();
  const Eigen::MatrixXd L = noise_factor(model.noise_cov);
  Rng rng(derive_seed(planted.seed, kStreamNoise));
  const long total = n_samples + burn;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(R, total);
  Eigen::VectorXd z(R);
  for (long t = 0; t < total; ++t) {
    for (Eigen::Index i = 0; i < R; ++i) z(i) = rng.normal();
    Eigen::VectorXd v = L * z;
    for (int k = 1; k <= p && k <= t; ++k) v += model.coeffs[k - 1] * x.col(t - k);
    x.col(t) = v;
  }
  std::vector<std::string> labels =
      planted.labels.empty() ? default_labels(R) : planted.labels;
  return MultichannelRecording(x.rightCols(n_samples), planted.rate_hz, std::move(labels));
}

ConnectivityMatrix analytic_dtf(const PlantedMvar& planted, std::span<const double> freqs_hz,
                                std::pair<double, double> band) {
  const MvarModel model = planted.model();
  require(model.stable(), ErrorCode::kUnstable, "planted system is unstable");
  return dtf(model, freqs_hz, band);
}

MultichannelRecording gen_phase_locked(double freq_hz, double lag_rad, double snr, long n_samples,
                                       double rate_hz, std::uint64_t seed) {
  require(rate_hz > 0.0 && freq_hz > 0.0 && freq_hz < rate_hz / 2.0, ErrorCode::kInvalidSpec,
          "frequency must lie in (0, nyquist)");
  require(n_samples >= 1, ErrorCode::kInvalidSpec, "n_samples must be positive");
  require(snr >= 0.0, ErrorCode::kInvalidSpec, "snr must be >= 0");
  Rng rng(seed);
  const double phi0 = rng.uniform(-std::numbers::pi, std::numbers::pi);
  const bool noiseless = std::isinf(snr);
  const double amp = snr > 0.0 ? 1.0 : 0.0;
  const double sigma = noiseless ? 0.0 : (snr > 0.0 ? std::sqrt(0.5 / snr) : 1.0);
  Eigen::MatrixXd x(2, n_samples);
  for (long t = 0; t < n_samples; ++t) {
    const double w = 2.0 * std::numbers::pi * freq_hz * static_cast<double>(t) / rate_hz + phi0;
    x(0, t) = amp * std::sin(w);
    x(1, t) = amp * std::sin(w - lag_rad);
  }
  if (!noiseless) {
    for (long t = 0; t < n_samples; ++t) x(0, t) += sigma * rng.normal();
    for (long t = 0; t < n_samples; ++t) x(1, t) += sigma * rng.normal();
  }
  return MultichannelRecording(std::move(x), rate_hz, default_labels(2));
}

MultichannelRecording gen_mixed_sources(int sources, int channels, long n_samples, double rate_hz,
                                        std::uint64_t seed) {
  require(sources >= 1 && channels >= 1 && n_samples >= 1, ErrorCode::kInvalidSpec,
          "sources, channels and n_samples must be positive");
  Rng rng(seed);
  Eigen::MatrixXd mix(channels, sources);
  for (Eigen::Index i = 0; i < mix.size(); ++i) mix.data()[i] = rng.normal();
  Eigen::MatrixXd s(sources, n_samples);
  for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = rng.normal();
  return MultichannelRecording(mix * s, rate_hz, default_labels(channels));
}

void PlantedCohort::validate() const {
  require(n_subjects >= 2, ErrorCode::kInvalidSpec, "cohort needs at least two subjects");
  require(rois >= 2, ErrorCode::kInvalidSpec, "cohort needs at least two ROIs");
  require(informative.size() == effects.size(), ErrorCode::kInvalidSpec,
          "one effect size per informative position is required");
  for (const auto& [a, b] : informative) {
    require(a >= 0 && a < rois && b >= 0 && b < rois, ErrorCode::kInvalidSpec,
            "informative position outside the matrix");
    require(metric == Metric::kDtf || a != b, ErrorCode::kInvalidSpec,
            "PLI informative positions must be off-diagonal");
  }
  for (double e : effects) require(std::isfinite(e), ErrorCode::kInvalidSpec, "effect must be finite");
  require(noise >= 0.0 && target_noise >= 0.0, ErrorCode::kInvalidSpec,
          "noise levels must be >= 0");
}

namespace {

Eigen::MatrixXd dtf_base(int R, Rng& rng) {
  Eigen::MatrixXd M(R, R);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = std::abs(rng.normal()) + 1e-3;
  for (int a = 0; a < R; ++a) M.row(a) /= M.row(a).sum();
  return M;
}

Eigen::MatrixXd pli_base(int R, Rng& rng) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(R, R);
  for (int a = 0; a < R; ++a) {
    for (int b = a + 1; b < R; ++b) M(a, b) = M(b, a) = rng.uniform();
  }
  return M;
}

// Session change for a DTF matrix: zero-sum noise and planted effects per
// row, so row sums stay 1. A row pushed outside [0, 1] is clipped and
// renormalized.
Eigen::MatrixXd dtf_day10(const Eigen::MatrixXd& day1, const Eigen::MatrixXd& effect,
                          double noise, Rng& rng) {
  const Eigen::Index R = day1.rows();
  const double spread = R > 1 ? std::sqrt(static_cast<double>(R) / (R - 1)) : 0.0;
  Eigen::MatrixXd out = day1;
  for (Eigen::Index a = 0; a < R; ++a) {
    Eigen::RowVectorXd d(R);
    for (Eigen::Index b = 0; b < R; ++b) d(b) = noise * spread * rng.normal();
    d.array() -= d.mean();
    for (Eigen::Index b = 0; b < R; ++b) {
      const double e = effect(a, b);
      if (e == 0.0) continue;
      d.array() -= e / static_cast<double>(R - 1);
      d(b) += e + e / static_cast<double>(R - 1);
    }
    out.row(a) += d;
    if ((out.row(a).array() < 0.0).any()) {
      out.row(a) = out.row(a).cwiseMax(0.0);
      out.row(a) /= out.row(a).sum();
    }
  }
  return out;
}

Eigen::MatrixXd pli_day10(const Eigen::MatrixXd& day1, const Eigen::MatrixXd& effect,
                          double noise, Rng& rng) {
  const Eigen::Index R = day1.rows();
  Eigen::MatrixXd out = day1;
  for (Eigen::Index a = 0; a < R; ++a) {
    for (Eigen::Index b = a + 1; b < R; ++b) {
      const double v = std::clamp(day1(a, b) + noise * rng.normal() + effect(a, b), 0.0, 1.0);
      out(a, b) = out(b, a) = v;
    }
  }
  return out;
}

}  // namespace

Cohort gen_cohort(const PlantedCohort& planted) {
  planted.validate();
  const int R = planted.rois;
  const std::vector<std::string> labels = roi_labels(R);
  const Band band = std::pair{1.0, 45.0};
  Cohort cohort;
  Rng response(derive_seed(planted.seed, kStreamResponse));
  Rng target_rng(derive_seed(planted.seed, kStreamTarget));
  for (int s = 0; s < planted.n_subjects; ++s) {
    const double u = response.uniform(0.0, 2.0);
    Eigen::MatrixXd effect = Eigen::MatrixXd::Zero(R, R);
    double total = 0.0;
    for (std::size_t j = 0; j < planted.informative.size(); ++j) {
      const auto [a, b] = planted.informative[j];
      const double e = u * planted.effects[j];
      if (planted.metric == Metric::kPli) {
        effect(std::min(a, b), std::max(a, b)) += e;
      } else {
        effect(a, b) += e;
      }
      total += e;
    }
    Rng r1(derive_seed(planted.seed, kStreamDay1, static_cast<std::uint64_t>(s)));
    Rng r10(derive_seed(planted.seed, kStreamDay10, static_cast<std::uint64_t>(s)));
    Eigen::MatrixXd d1, d10;
    if (planted.metric == Metric::kDtf) {
      d1 = dtf_base(R, r1);
      d10 = dtf_day10(d1, effect, planted.noise, r10);
    } else {
      d1 = pli_base(R, r1);
      d10 = pli_day10(d1, effect, planted.noise, r10);
    }
    SubjectSessions subj;
    char id[16];
    std::snprintf(id, sizeof id, "S%03d", s + 1);
    subj.subject_id = id;
    subj.day1 = ConnectivityMatrix{std::move(d1), planted.metric, labels, band};
    subj.day10 = ConnectivityMatrix{std::move(d10), planted.metric, labels, band};
    subj.target = planted.target_offset - planted.target_gain * total +
                  planted.target_noise * target_rng.normal();
    cohort.subjects.push_back(std::move(subj));
    cohort.responsiveness.push_back(u);
  }
  return cohort;
}

std::vector<RecordingSubject> gen_recording_cohort(const RecordingCohortSpec& spec) {
  require(spec.n_subjects >= 2, ErrorCode::kInvalidSpec, "cohort needs at least two subjects");
  require(spec.channels >= 2 && spec.order >= 1, ErrorCode::kInvalidSpec,
          "need at least two channels and order >= 1");
  require(spec.informative.size() == spec.effects.size(), ErrorCode::kInvalidSpec,
          "one effect size per informative position is required");
  for (const auto& [a, b] : spec.informative) {
    require(a >= 0 && a < spec.channels && b >= 0 && b < spec.channels && a != b,
            ErrorCode::kInvalidSpec, "informative coupling must join two distinct channels");
  }
  const auto labels = roi_labels(spec.channels);
  Rng response(derive_seed(spec.seed, kStreamResponse));
  Rng target_rng(derive_seed(spec.seed, kStreamTarget));
  std::vector<RecordingSubject> out;
  for (int s = 0; s < spec.n_subjects; ++s) {
    const double u = response.uniform(0.0, 2.0);
    // Subject baseline: weak random coupling around damped self terms.
    Rng base(derive_seed(spec.seed, kStreamBase, static_cast<std::uint64_t>(s)));
    PlantedMvar day1;
    day1.rate_hz = spec.rate_hz;
    day1.labels = labels;
    day1.noise_cov = Eigen::MatrixXd::Identity(spec.channels, spec.channels);
    for (int k = 0; k < spec.order; ++k) {
      Eigen::MatrixXd A(spec.channels, spec.channels);
      for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = 0.05 * base.normal();
      const double self = k == 0 ? 0.5 : -0.2;
      A.diagonal().array() += self;
      day1.coeffs.push_back(std::move(A));
    }
    PlantedMvar day10 = day1;
    double total = 0.0;
    for (std::size_t j = 0; j < spec.informative.size(); ++j) {
      const auto [a, b] = spec.informative[j];
      day10.coeffs[0](a, b) += u * spec.effects[j];
      total += u * spec.effects[j];
    }
    day1.seed = derive_seed(spec.seed, kStreamDay1, static_cast<std::uint64_t>(s));
    day10.seed = derive_seed(spec.seed, kStreamDay10, static_cast<std::uint64_t>(s));
    char id[16];
    std::snprintf(id, sizeof id, "S%03d", s + 1);
    MultichannelRecording r1 = gen_mvar_signal(day1, spec.n_samples);
    MultichannelRecording r10 = gen_mvar_signal(day10, spec.n_samples);
    r1.meta() = {{"subject", id}, {"session", "day1"}};
    r10.meta() = {{"subject", id}, {"session", "day10"}};
    const double target =
        spec.target_offset - spec.target_gain * total + spec.target_noise * target_rng.normal();
    out.push_back(RecordingSubject{id, std::move(r1), std::move(r10), target});
  }
  return out;
}

}  // namespace fcpred
