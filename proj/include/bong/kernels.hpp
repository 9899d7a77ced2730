#pragma once

#include "bong/common.hpp"
#include "bong/mlp.hpp"

namespace bong {

// Every kernel below exists in two flavours selected by Exec. Both write into
// per-index slots and any reduction happens afterwards in index order, so the
// two flavours produce bitwise-identical results.
enum class Exec { Serial, Parallel };

Exec default_exec();
void set_default_exec(Exec e);
int max_threads();

// out.col(j) = fn(j) for j in [0, n).
template <class Fn>
Mat map_columns(Index rows, Index n, Fn&& fn, Exec exec) {
  Mat out(rows, n);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (Index j = 0; j < n; ++j) out.col(j) = fn(j);
  } else {
    for (Index j = 0; j < n; ++j) out.col(j) = fn(j);
  }
  return out;
}

// out(j) = fn(j) for j in [0, n).
template <class Fn>
Vec map_scalars(Index n, Fn&& fn, Exec exec) {
  Vec out(n);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (Index j = 0; j < n; ++j) out(j) = fn(j);
  } else {
    for (Index j = 0; j < n; ++j) out(j) = fn(j);
  }
  return out;
}

// Column m is grad log p(y | f(x, thetas.col(m))).
Mat sample_gradients(const MlpSpec& spec, const ObsModel& model, const Mat& thetas, const Vec& x,
                     const Vec& y, Exec exec);

// Central-difference Hessian of the log-likelihood, symmetrized.
Mat fd_hessian_loglik(const MlpSpec& spec, const ObsModel& model, const Vec& theta, const Vec& x,
                      const Vec& y, Exec exec);

// Column j is H z_j by forward difference of the analytic gradient.
Mat hessian_vector_products(const MlpSpec& spec, const ObsModel& model, const Vec& theta,
                            const Vec& x, const Vec& y, const Mat& Z, Exec exec);

// Entry i is log p(ys.col(i) | f(xs.col(i), theta)).
Vec example_logliks(const MlpSpec& spec, const ObsModel& model, const Vec& theta, const Mat& xs,
                    const Mat& ys, Exec exec);

}  // namespace bong
