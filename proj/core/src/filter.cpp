#include "fcpred/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fcpred/error.hpp"

namespace fcpred {
namespace {

using cd = std::complex<double>;

struct State {
  double z1 = 0.0, z2 = 0.0;
};

// Steady-state section states for a unit step at the cascade input.
std::vector<State> step_states(const std::vector<Biquad>& sections) {
  std::vector<State> zi(sections.size());
  double level = 1.0;
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const Biquad& q = sections[s];
    const double dc = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    zi[s].z2 = (q.b2 - q.a2 * dc) * level;
    zi[s].z1 = (q.b1 - q.a1 * dc) * level + zi[s].z2;
    level *= dc;
  }
  return zi;
}

void run_cascade(const std::vector<Biquad>& sections, std::vector<State> state,
                 std::vector<double>& x) {
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const Biquad& q = sections[s];
    double z1 = state[s].z1, z2 = state[s].z2;
    for (double& v : x) {
      const double in = v;
      const double out = q.b0 * in + z1;
      z1 = q.b1 * in - q.a1 * out + z2;
      z2 = q.b2 * in - q.a2 * out;
      v = out;
    }
  }
}

std::vector<State> scaled(std::vector<State> zi, double k) {
  for (auto& z : zi) {
    z.z1 *= k;
    z.z2 *= k;
  }
  return zi;
}

}  // namespace

std::complex<double> SosFilter::response(double f_hz, double rate_hz) const {
  const double w = 2.0 * std::numbers::pi * f_hz / rate_hz;
  const cd zinv = std::polar(1.0, -w);
  const cd zinv2 = zinv * zinv;
  cd h = 1.0;
  for (const Biquad& q : sections_) {
    h *= (q.b0 + q.b1 * zinv + q.b2 * zinv2) / (1.0 + q.a1 * zinv + q.a2 * zinv2);
  }
  return h;
}

std::vector<double> SosFilter::filter(std::span<const double> x) const {
  std::vector<double> y(x.begin(), x.end());
  if (y.empty()) return y;
  run_cascade(sections_, scaled(step_states(sections_), y.front()), y);
  return y;
}

std::vector<double> SosFilter::filtfilt(std::span<const double> x, int pad) const {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  if (n == 0) return {};
  const std::ptrdiff_t edge = std::clamp<std::ptrdiff_t>(pad, 0, n - 1);

  std::vector<double> ext;
  ext.reserve(static_cast<std::size_t>(n + 2 * edge));
  for (std::ptrdiff_t i = edge; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::ptrdiff_t i = 1; i <= edge; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = step_states(sections_);
  run_cascade(sections_, scaled(zi, ext.front()), ext);
  std::reverse(ext.begin(), ext.end());
  run_cascade(sections_, scaled(zi, ext.front()), ext);
  std::reverse(ext.begin(), ext.end());

  return std::vector<double>(ext.begin() + edge, ext.begin() + edge + n);
}

SosFilter design_butterworth_bandpass(double low_hz, double high_hz, double rate_hz,
                                      int order) {
  require(order >= 1 && order <= 12, ErrorCode::kInvalidSpec,
          "butterworth order must be in [1, 12]");
  require(low_hz > 0.0 && low_hz < high_hz && high_hz < rate_hz / 2.0,
          ErrorCode::kInvalidSpec, "bandpass edges must satisfy 0 < low < high < nyquist");

  const double pi = std::numbers::pi;
  const double fs2 = 2.0 * rate_hz;
  const double w_lo = fs2 * std::tan(pi * low_hz / rate_hz);
  const double w_hi = fs2 * std::tan(pi * high_hz / rate_hz);
  const double w0 = std::sqrt(w_lo * w_hi);
  const double bw = w_hi - w_lo;

  std::vector<cd> upper;
  std::vector<double> real;
  for (int k = 0; k < order; ++k) {
    const cd p = std::polar(1.0, pi * (2.0 * k + order + 1.0) / (2.0 * order));
    const cd a = p * (bw / 2.0);
    const cd d = std::sqrt(a * a - w0 * w0);
    for (const cd s : {a + d, a - d}) {
      const cd z = (fs2 + s) / (fs2 - s);
      const double tol = 1e-12 * std::abs(z);
      if (z.imag() > tol) {
        upper.push_back(z);
      } else if (std::abs(z.imag()) <= tol) {
        real.push_back(z.real());
      }
    }
  }
  std::sort(real.begin(), real.end());
  require(real.size() % 2 == 0 && upper.size() * 2 + real.size() == 2u * order,
          ErrorCode::kInvalidSpec, "bandpass pole pairing failed");

  std::vector<Biquad> sections;
  for (const cd& z : upper) {
    sections.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
  }
  for (std::size_t i = 0; i < real.size(); i += 2) {
    sections.push_back({1.0, 0.0, -1.0, -(real[i] + real[i + 1]), real[i] * real[i + 1]});
  }

  SosFilter unscaled(sections);
  const double f_center = rate_hz / pi * std::atan(w0 / fs2);
  const double gain = std::abs(unscaled.response(f_center, rate_hz));
  const double per_section = std::pow(gain, -1.0 / static_cast<double>(sections.size()));
  for (Biquad& q : sections) {
    q.b0 *= per_section;
    q.b1 *= per_section;
    q.b2 *= per_section;
  }
  return SosFilter(std::move(sections));
}

SosFilter design_notch(double center_hz, double bandwidth_hz, double rate_hz) {
  require(center_hz > 0.0 && center_hz < rate_hz / 2.0, ErrorCode::kInvalidSpec,
          "notch centre must satisfy 0 < centre < nyquist");
  require(bandwidth_hz > 0.0 && bandwidth_hz < rate_hz / 2.0, ErrorCode::kInvalidSpec,
          "notch bandwidth must be positive and below nyquist");
  const double pi = std::numbers::pi;
  const double w0 = 2.0 * pi * center_hz / rate_hz;
  const double bw = 2.0 * pi * bandwidth_hz / rate_hz;
  const double g = 1.0 / (1.0 + std::tan(bw / 2.0));
  const double c = std::cos(w0);
  return SosFilter({Biquad{g, -2.0 * g * c, g, -2.0 * g * c, 2.0 * g - 1.0}});
}

}  // namespace fcpred
