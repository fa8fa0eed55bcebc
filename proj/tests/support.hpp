#pragma once

#include "helfrich/mesh.hpp"

#include <Eigen/Geometry>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

namespace test {

/// Fresh directory under the system temp dir, one per test binary and name.
inline std::string scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("helfrich_tests_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline Eigen::Matrix3d random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace test
