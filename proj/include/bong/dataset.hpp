#pragma once

#include <string>

#include "bong/common.hpp"

namespace bong {

enum class TaskKind { Regression, Classification };

// Records are columns: X is D x N, Y is C x N (one-hot for classification).
struct Dataset {
  std::string name;
  Mat X;
  Mat Y;
  TaskKind task = TaskKind::Regression;

  Index size() const { return X.cols(); }
  Index input_dim() const { return X.rows(); }
  Index output_dim() const { return Y.rows(); }
  Dataset slice(Index start, Index n) const;
  void check() const;
};

// w ~ N(0, I_D); x ~ N(0, I_D); y = w^T x + noise * eps.
Dataset synth_linreg(Index D, Index T, double noise, std::uint64_t seed, Vec* w_out = nullptr);

// y = teacher(x) + noise * eps with a fixed tanh teacher MLP D-20-1.
Dataset synth_nonlin(Index D, Index T, std::uint64_t seed, double noise = 0.1);

}  // namespace bong
