#pragma once

#include <vector>

#include "bong/common.hpp"
#include "bong/obs_model.hpp"

namespace bong {

enum class Activation { Tanh, Relu };

// Fully connected net over a flat parameter vector. Per layer the weight
// matrix (n_out x n_in, column-major) comes first, then the bias. The output
// layer is linear.
struct MlpSpec {
  std::vector<Index> layers;  // D, hidden..., C
  Activation act = Activation::Tanh;
  bool use_bias = true;

  Index num_params() const;
  Index input_dim() const { return layers.front(); }
  Index output_dim() const { return layers.back(); }
  void check() const;
};

Vec init_params(const MlpSpec& spec, Rng& rng);

Vec forward(const MlpSpec& spec, const Vec& theta, const Vec& x);

// Gradient of cot^T f(x, theta) in theta, one backward pass.
Vec vjp(const MlpSpec& spec, const Vec& theta, const Vec& x, const Vec& cot);

// C x P Jacobian of f.
Mat jacobian_f(const MlpSpec& spec, const Vec& theta, const Vec& x);

// C x P Jacobian of h = mean_map(f); row c uses cotangent V[:, c].
Mat jacobian_h(const MlpSpec& spec, const ObsModel& model, const Vec& theta, const Vec& x);

Vec grad_loglik_theta(const MlpSpec& spec, const ObsModel& model, const Vec& theta, const Vec& x,
                      const Vec& y);

inline constexpr Index kDefaultHessianCap = 2000;

// Dense Hessian of the log-likelihood by central differences of the analytic
// gradient, step 1e-5 (1 + |theta_i|), symmetrized.
Mat hessian_loglik_theta(const MlpSpec& spec, const ObsModel& model, const Vec& theta,
                         const Vec& x, const Vec& y, Index cap = kDefaultHessianCap);

// (1/N) sum_j z_j * (H z_j), Rademacher z_j, H z by forward difference.
Vec hutchinson_diag_hessian(const MlpSpec& spec, const ObsModel& model, const Vec& theta,
                            const Vec& x, const Vec& y, Index N, Rng& rng);

}  // namespace bong
