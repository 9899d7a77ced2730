#pragma once

#include <vector>

#include "bong/experiment.hpp"

namespace bong {

enum class TuneAt { Final, Mid };

struct TuneTrial {
  double lr;
  double sigma0_sq;
  double score;  // validation plugin NLPD; +inf when the run failed
};

struct TuneResult {
  double best_lr;
  double best_sigma0_sq;
  std::vector<TuneTrial> trials;
};

// Grid search over (lr, sigma0^2). Each trial streams the first 80% of the
// training prefix and scores plugin NLPD on the held-out last 20%. Ties go to
// the smaller lr, then the smaller sigma0^2. An empty sigma0 grid keeps the
// configured value. BONG has a fixed unit rate, so its lr grid collapses to 1.
TuneResult tune_learning_rate(const RunConfig& base, const std::vector<double>& lr_grid,
                              const std::vector<double>& sigma0_grid = {},
                              TuneAt at = TuneAt::Final);

}  // namespace bong
