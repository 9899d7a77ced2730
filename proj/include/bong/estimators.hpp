#pragma once

#include <variant>

#include "bong/gaussian.hpp"
#include "bong/kernels.hpp"
#include "bong/mlp.hpp"
#include "bong/obs_model.hpp"

namespace bong {

enum class EstimatorKind { MCHess, MCEF, LinHess, LinEF };

EstimatorKind parse_estimator(const std::string& name);  // mc-hess|mc-ef|lin-hess|lin-ef
std::string estimator_name(EstimatorKind k);

struct EstimatorCfg {
  EstimatorKind kind = EstimatorKind::LinHess;
  Index M = 10;           // MC samples
  Index N = 0;            // Hutchinson probes; 0 means 10 * M
  bool antithetic = false;  // MC draws in mirrored pairs mu +- d (M must be even)
  double obs_jitter = -1.0; // regularized_Rinv jitter; negative selects the model default
  Index hessian_cap = kDefaultHessianCap;
};

// Expected-Hessian structures.
struct DenseG {
  Mat G;
};
struct DiagG {
  Vec d;
};
struct NegOuterCols {  // G = -B B^T
  Mat B;
};
struct LinHessG {  // G = -H^T A^T A H
  Mat H;
  Mat A;
  Vec yhat;
};

struct GradEstimate {
  Vec g;
  std::variant<DenseG, DiagG, NegOuterCols, LinHessG> G;

  Mat dense() const;
  Vec diag() const;
  // B with G = -B B^T; throws EstimatorIncompatible for Dense/Diag.
  Mat columns() const;
  bool is_low_rank() const { return G.index() >= 2; }
};

struct Problem {
  MlpSpec spec;
  ObsModel model;
};

GradEstimate grad_mc_hess(const Belief& state, const Problem& pb, const Vec& x, const Vec& y,
                          const EstimatorCfg& cfg, Rng& rng);
GradEstimate grad_mc_ef(const Belief& state, const Problem& pb, const Vec& x, const Vec& y,
                        const EstimatorCfg& cfg, Rng& rng);
GradEstimate grad_lin_hess(const Belief& state, const Problem& pb, const Vec& x, const Vec& y,
                           const EstimatorCfg& cfg = {});
GradEstimate grad_lin_ef(const Belief& state, const Problem& pb, const Vec& x, const Vec& y,
                         const EstimatorCfg& cfg = {});

GradEstimate estimate(const Belief& state, const Problem& pb, const Vec& x, const Vec& y,
                      const EstimatorCfg& cfg, Rng& rng);

// The M parameter draws used by the MC estimators (antithetic if configured).
Mat draw_mc_samples(const Belief& state, const EstimatorCfg& cfg, Rng& rng);

}  // namespace bong
