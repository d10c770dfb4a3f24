#pragma once

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "fcpred/error.hpp"
#include "fcpred/random.hpp"
#include "fcpred/recording.hpp"

namespace fcpred::testing {

#define EXPECT_FCPRED_ERROR(stmt, expected_code)                    \
  do {                                                              \
    try {                                                           \
      stmt;                                                         \
      ADD_FAILURE() << "expected fcpred::Error from " #stmt;        \
    } catch (const ::fcpred::Error& e_) {                           \
      EXPECT_EQ(e_.code(), expected_code) << e_.what();             \
    }                                                               \
  } while (0)

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = rng.normal();
  return M;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  return random_matrix(n, 1, seed).col(0);
}

inline std::vector<double> sinusoid(double f, double rate, long n, double phase = 0.0,
                                    double amp = 1.0) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (long t = 0; t < n; ++t) {
    x[t] = amp * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(t) / rate + phase);
  }
  return x;
}

inline MultichannelRecording rows_to_recording(const std::vector<std::vector<double>>& rows,
                                               double rate) {
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    for (std::size_t t = 0; t < rows[c].size(); ++t) M(c, t) = rows[c][t];
  }
  return MultichannelRecording(M, rate, default_labels(M.rows()));
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fcpred_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fcpred::testing
