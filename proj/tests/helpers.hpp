#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <string>

#include "homotop/rng.hpp"

namespace testutil {

// fresh temp directory per test run section
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("homotop_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline Eigen::MatrixXd random_cloud(int n, int d, std::uint64_t seed,
                                    double scale = 1.0) {
  homotop::SplitMix64 rng(seed);
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = scale * (2.0 * rng.uniform01() - 1.0);
  return m;
}

// RMS distance between X and Y after the best rigid alignment (rotation /
// reflection + translation), the standard Procrustes check for embeddings
// defined up to isometry.
inline double procrustes_rms(const Eigen::MatrixXd& x,
                             const Eigen::MatrixXd& y) {
  const Eigen::RowVectorXd cx = x.colwise().mean(), cy = y.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - cx, yc = y.rowwise() - cy;
  const Eigen::MatrixXd cross = xc.transpose() * yc;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd rot = svd.matrixU() * svd.matrixV().transpose();
  const Eigen::MatrixXd aligned = xc * rot;
  return std::sqrt((aligned - yc).squaredNorm() /
                   static_cast<double>(x.rows()));
}

inline Eigen::MatrixXd circle_cloud(int n, double radius = 1.0,
                                    double noise = 0.0,
                                    std::uint64_t seed = 1) {
  homotop::SplitMix64 rng(seed);
  Eigen::MatrixXd pts(n, 2);
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    pts(i, 0) = radius * std::cos(a) + noise * (2 * rng.uniform01() - 1);
    pts(i, 1) = radius * std::sin(a) + noise * (2 * rng.uniform01() - 1);
  }
  return pts;
}

// quasi-uniform points on the unit sphere (Fibonacci lattice)
inline Eigen::MatrixXd fibonacci_sphere(int n) {
  Eigen::MatrixXd pts(n, 3);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double y = 1.0 - 2.0 * i / (n - 1.0);
    const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    pts(i, 0) = r * std::cos(golden * i);
    pts(i, 1) = y;
    pts(i, 2) = r * std::sin(golden * i);
  }
  return pts;
}

}  // namespace testutil
