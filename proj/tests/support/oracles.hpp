#pragma once

// Reference solvers that share no code with the library. Slow and dense on
// purpose.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace fcpred::testing {

// Least squares through the normal equations, optionally with an intercept
// column. Returns [intercept, w...] when intercept is set.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        bool intercept, double alpha = 0.0) {
  Eigen::MatrixXd A = X;
  if (intercept) {
    A.resize(X.rows(), X.cols() + 1);
    A.col(0).setOnes();
    A.rightCols(X.cols()) = X;
  }
  Eigen::MatrixXd G = A.transpose() * A;
  for (Eigen::Index j = intercept ? 1 : 0; j < G.rows(); ++j) G(j, j) += alpha;
  return G.inverse() * (A.transpose() * y);
}

// Butterworth bandpass squared magnitude evaluated on the prewarped analog
// frequency axis.
inline double butterworth_bandpass_gain2(double f, double low, double high, double fs, int order) {
  auto warp = [fs](double hz) { return 2.0 * fs * std::tan(std::numbers::pi * hz / fs); };
  const double w = warp(f);
  const double wl = warp(low);
  const double wh = warp(high);
  const double w0sq = wl * wh;
  const double bw = wh - wl;
  const double x = (w * w - w0sq) / (w * bw);
  return 1.0 / (1.0 + std::pow(x * x, order));
}

// min 1/2 a'Qa + c'a  s.t.  e'a = 0, 0 <= a <= C, by a primal log-barrier
// method with equality-constrained Newton steps, run until the barrier gap
// 2l/t is below 1e-10. Returns the minimizer.
inline Eigen::VectorXd barrier_qp(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c,
                                  const Eigen::VectorXd& e, double C) {
  const Eigen::Index l = c.size();
  Eigen::VectorXd a = Eigen::VectorXd::Constant(l, 0.5 * C);
  // Make the start satisfy e'a = 0 when e has mixed signs of equal count.
  const double shift = e.dot(a);
  if (std::abs(shift) > 0.0) {
    a -= e * (shift / e.squaredNorm());
  }
  auto phi = [&](const Eigen::VectorXd& v, double t) {
    double s = t * (0.5 * v.dot(Q * v) + c.dot(v));
    for (Eigen::Index i = 0; i < l; ++i) s -= std::log(v(i)) + std::log(C - v(i));
    return s;
  };
  double t = 1.0;
  for (int outer = 0; outer < 60; ++outer) {
    for (int it = 0; it < 200; ++it) {
      Eigen::VectorXd g = t * (Q * a + c);
      Eigen::MatrixXd H = t * Q;
      for (Eigen::Index i = 0; i < l; ++i) {
        g(i) += -1.0 / a(i) + 1.0 / (C - a(i));
        H(i, i) += 1.0 / (a(i) * a(i)) + 1.0 / ((C - a(i)) * (C - a(i)));
      }
      // Equality-constrained Newton step through the Schur complement; the
      // residual term pulls any rounding drift in e'a back to zero.
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
      const Eigen::VectorXd Hg = ldlt.solve(g);
      const Eigen::VectorXd He = ldlt.solve(e);
      const double nu = (e.dot(a) - e.dot(Hg)) / e.dot(He);
      const Eigen::VectorXd dx = -(Hg + nu * He);
      const double decrement = -g.dot(dx);
      if (decrement / 2.0 < 1e-14) break;
      double step = 1.0;
      for (Eigen::Index i = 0; i < l; ++i) {
        if (dx(i) < 0.0) step = std::min(step, -0.99 * a(i) / dx(i));
        if (dx(i) > 0.0) step = std::min(step, 0.99 * (C - a(i)) / dx(i));
      }
      const double f0 = phi(a, t);
      while (phi(a + step * dx, t) > f0 - 0.25 * step * decrement && step > 1e-16) step *= 0.5;
      a += step * dx;
    }
    if (2.0 * static_cast<double>(l) / t < 1e-10) break;
    t *= 8.0;
  }
  return a;
}

// Transfer function of an MVAR model at one frequency, by explicit complex
// sum and Eigen inverse.
inline Eigen::MatrixXcd mvar_transfer(const std::vector<Eigen::MatrixXd>& A, double f, double fs) {
  const Eigen::Index R = A.front().rows();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(R, R);
  for (std::size_t k = 0; k < A.size(); ++k) {
    const double ang = -2.0 * std::numbers::pi * f * static_cast<double>(k + 1) / fs;
    M -= A[k].cast<std::complex<double>>() * std::polar(1.0, ang);
  }
  return M.inverse();
}

}  // namespace fcpred::testing
