#pragma once

#include "bong/common.hpp"

namespace bong::testing {

inline Mat random_spd(Index n, Rng& rng, double floor = 0.5) {
  Mat A = Mat::NullaryExpr(n, n, [&] { return std::normal_distribution<double>(0, 1)(rng); });
  Mat S = A * A.transpose() / double(n);
  S.diagonal().array() += floor;
  return S;
}

inline Mat random_mat(Index r, Index c, Rng& rng, double scale = 1.0) {
  return Mat::NullaryExpr(r, c, [&] { return scale * std::normal_distribution<double>(0, 1)(rng); });
}

inline Vec random_vec(Index n, Rng& rng, double scale = 1.0) {
  return random_mat(n, 1, rng, scale).col(0);
}

inline Vec random_positive(Index n, Rng& rng, double lo = 0.5, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return Vec::NullaryExpr(n, [&] { return u(rng); });
}

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double rel_err(const Mat& a, const Mat& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace bong::testing
