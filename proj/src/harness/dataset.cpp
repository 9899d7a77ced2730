#include "bong/dataset.hpp"

#include "bong/mlp.hpp"

namespace bong {

Dataset Dataset::slice(Index start, Index n) const {
  if (start < 0 || n < 0 || start + n > size()) throw ShapeError("dataset slice out of range");
  return {name, X.middleCols(start, n), Y.middleCols(start, n), task};
}

void Dataset::check() const {
  if (X.cols() != Y.cols()) throw ShapeError("dataset X/Y record counts differ");
  if (task == TaskKind::Classification) {
    for (Index i = 0; i < Y.cols(); ++i) {
      if (std::abs(Y.col(i).sum() - 1.0) > 0 || (Y.col(i).array() * (1 - Y.col(i).array())).any())
        throw ShapeError("classification targets must be one-hot");
    }
  }
}

Dataset synth_linreg(Index D, Index T, double noise, std::uint64_t seed, Vec* w_out) {
  if (T < 1 || D < 1) throw InvalidConfig("synth_linreg needs D, T >= 1");
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec w = standard_normal(D, rng);
  Dataset ds{"synth-linreg", Mat(D, T), Mat(1, T), TaskKind::Regression};
  for (Index t = 0; t < T; ++t) {
    for (Index j = 0; j < D; ++j) ds.X(j, t) = nd(rng);
    ds.Y(0, t) = w.dot(ds.X.col(t)) + noise * nd(rng);
  }
  if (w_out) *w_out = w;
  return ds;
}

Dataset synth_nonlin(Index D, Index T, std::uint64_t seed, double noise) {
  if (T < 1 || D < 1) throw InvalidConfig("synth_nonlin needs D, T >= 1");
  Rng rng(seed);
  MlpSpec teacher{{D, 20, 1}, Activation::Tanh, true};
  Vec theta = init_params(teacher, rng);
  // nonzero biases so the teacher is not odd-symmetric
  std::normal_distribution<double> nd(0.0, 1.0);
  theta.segment(D * 20, 20) = 0.5 * standard_normal(20, rng);
  Dataset ds{"synth-nonlin", Mat(D, T), Mat(1, T), TaskKind::Regression};
  for (Index t = 0; t < T; ++t) {
    for (Index j = 0; j < D; ++j) ds.X(j, t) = nd(rng);
    ds.Y(0, t) = forward(teacher, theta, ds.X.col(t))(0) + noise * nd(rng);
  }
  return ds;
}

}  // namespace bong
