#include "bong/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bong/metrics.hpp"

namespace bong {

TuneResult tune_learning_rate(const RunConfig& base, const std::vector<double>& lr_grid_in,
                              const std::vector<double>& sigma0_grid_in, TuneAt at) {
  if (lr_grid_in.empty()) throw InvalidConfig("learning-rate grid is empty");
  std::vector<double> lrs = lr_grid_in;
  if (base.alg.algorithm == Algorithm::BONG) lrs = {1.0};
  std::vector<double> sigmas = sigma0_grid_in;
  if (sigmas.empty()) sigmas = {base.sigma0_sq};
  std::sort(lrs.begin(), lrs.end());
  lrs.erase(std::unique(lrs.begin(), lrs.end()), lrs.end());
  std::sort(sigmas.begin(), sigmas.end());
  sigmas.erase(std::unique(sigmas.begin(), sigmas.end()), sigmas.end());

  TuneResult res;
  for (double a : lrs)
    for (double s : sigmas) res.trials.push_back({a, s, std::numeric_limits<double>::infinity()});

  if (base.alg.algorithm == Algorithm::BONG && sigmas.size() == 1) {
    res.best_lr = 1.0;
    res.best_sigma0_sq = sigmas[0];
    return res;
  }

  // Data does not depend on lr or sigma0, so one preparation serves every trial.
  Experiment ex = prepare(base);
  const Index n = ex.train.size();
  if (n < 2) throw InvalidConfig("tuning needs at least 2 training records");
  const Index n_val = std::max<Index>(1, n / 5);
  const Index n_fit = n - n_val;
  const Index n_run = at == TuneAt::Mid ? std::max<Index>(1, n_fit / 2) : n_fit;
  const Dataset fit = ex.train.slice(0, n_run);
  const Dataset val = ex.train.slice(n_fit, n_val);

  const Index n_trials = Index(res.trials.size());
#pragma omp parallel for schedule(dynamic)
  for (Index k = 0; k < n_trials; ++k) {
    TuneTrial& tr = res.trials[std::size_t(k)];
    try {
      AlgorithmCfg alg = ex.cfg.alg;
      alg.lr = tr.lr;
      alg.normalize();
      Rng init_rng(derive_seed(base.seed, 2));
      Vec mu0 = init_params(ex.pb.spec, init_rng);
      Belief prior = make_prior(alg.family, mu0, tr.sigma0_sq, alg.rank);
      StreamResult sr = run_stream(prior, ex.cfg.dyn, fit.X, fit.Y, ex.pb, alg,
                                   derive_seed(base.seed, 3));
      const double score = nlpd_plugin(sr.state, ex.pb, val);
      if (std::isfinite(score)) tr.score = score;
    } catch (const std::exception&) {
      // failed trials keep +inf
    }
  }

  const TuneTrial* best = nullptr;
  for (const auto& tr : res.trials)
    if (std::isfinite(tr.score) && (!best || tr.score < best->score)) best = &tr;
  if (!best) throw AllTrialsFailed("every tuning trial failed or produced NaN");
  res.best_lr = best->lr;
  res.best_sigma0_sq = best->sigma0_sq;
  return res;
}

}  // namespace bong
