#pragma once

#include <random>
#include <vector>

#include "stresslab/stresslab.hpp"

namespace testing_support {

using stresslab::CoordinateBox;
using stresslab::Vec;

/// Uniform points in a shrunken copy of `box` (margin is a fraction of each extent).
inline std::vector<Vec> random_points(const CoordinateBox& box, int n, unsigned seed, double margin = 0.1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> out;
  for (int k = 0; k < n; ++k) {
    Vec x(box.dim());
    for (int i = 0; i < box.dim(); ++i) {
      const double w = box.hi[i] - box.lo[i];
      x[i] = box.lo[i] + w * (margin + (1.0 - 2.0 * margin) * u(rng));
    }
    out.push_back(x);
  }
  return out;
}

inline Vec random_unit(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(m);
  for (int i = 0; i < m; ++i) v[i] = n(rng);
  return v / v.norm();
}

inline Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

}  // namespace testing_support

#define EXPECT_THROW_CODE(stmt, expected_code)                                     \
  do {                                                                             \
    try {                                                                          \
      stmt;                                                                        \
      ADD_FAILURE() << "no exception from: " #stmt;                                \
    } catch (const stresslab::Error& e_) {                                         \
      EXPECT_EQ(e_.code(), expected_code) << e_.what();                            \
    }                                                                              \
  } while (0)
