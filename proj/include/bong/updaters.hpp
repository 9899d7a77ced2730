#pragma once

#include <functional>
#include <vector>

#include "bong/estimators.hpp"
#include "bong/gaussian.hpp"

namespace bong {

enum class Algorithm { BONG, BLR, BOG, BBB };

Algorithm parse_algorithm(const std::string& name);  // bong|blr|bog|bbb
std::string algorithm_name(Algorithm a);

struct AlgorithmCfg {
  Algorithm algorithm = Algorithm::BONG;
  FamilyTag family;
  EstimatorCfg est;
  double lr = 1.0;
  Index iters = 1;
  Index rank = 10;  // DLR only
  ValidationPolicy policy;

  // Applies the algorithm contracts (BONG: lr = 1, iters = 1; BOG: iters = 1)
  // and rejects invalid values.
  void normalize();
};

struct DynamicsCfg {
  enum class Kind { Static, RandomWalk } kind = Kind::Static;
  double gamma = 1.0;
  double q = 0.0;
};

Belief predict(const Belief& state, const DynamicsCfg& dyn);

// One step of each algorithm. `prior` is the predicted belief q_{t|t-1};
// `iterate` is the current inner iterate for the iterative algorithms. The
// Natural/Moment choice comes from `fam`; DLR keeps the rank of the prior's W.
Belief bong_step(const Belief& prior, const GradEstimate& est, const FamilyTag& fam,
                 const ValidationPolicy& pol = {});
Belief blr_step(const Belief& prior, const Belief& iterate, const GradEstimate& est, double lr,
                const FamilyTag& fam, const ValidationPolicy& pol = {});
Belief bog_step(const Belief& prior, const GradEstimate& est, double lr, const FamilyTag& fam,
                const ValidationPolicy& pol = {});
Belief bbb_step(const Belief& prior, const Belief& iterate, const GradEstimate& est, double lr,
                const FamilyTag& fam, const ValidationPolicy& pol = {});

struct UpdateStats {
  Index estimator_calls = 0;
};

// Runs cfg.iters inner iterations from `state`. The MC substream of inner
// iteration i at step t is seeded from (seed, t, i).
Belief update(const Belief& state, const Vec& x, const Vec& y, const Problem& pb,
              const AlgorithmCfg& cfg, std::uint64_t seed, std::size_t step,
              UpdateStats* stats = nullptr);

struct StepRecord {
  std::size_t t = 0;
  std::int64_t wall_ns = 0;
};

using EvalHook = std::function<void(std::size_t t, const Belief& state, std::int64_t wall_ns)>;

struct StreamOptions {
  std::size_t eval_every = 10;  // hook runs when t % eval_every == 0 and at t = T
  EvalHook hook;
};

struct StreamResult {
  Belief state;
  std::vector<StepRecord> steps;
};

// Stream examples are the columns of X and Y.
StreamResult run_stream(const Belief& init, const DynamicsCfg& dyn, const Mat& X, const Mat& Y,
                        const Problem& pb, const AlgorithmCfg& cfg, std::uint64_t seed,
                        const StreamOptions& opts = {});

namespace detail {
GaussFC fc_step(Algorithm alg, Param param, const GaussFC& prior, const GaussFC& it,
                const GradEstimate& est, double lr);
GaussDiag diag_step(Algorithm alg, Param param, const GaussDiag& prior, const GaussDiag& it,
                    const GradEstimate& est, double lr);
GaussDLR dlr_step(Algorithm alg, const GaussDLR& prior, const GaussDLR& it,
                  const GradEstimate& est, double lr);
}  // namespace detail

}  // namespace bong
