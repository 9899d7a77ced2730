#pragma once

#include "bong/dataset.hpp"
#include "bong/estimators.hpp"

namespace bong {

enum class PredMode { Plugin, MC, Linearized };

// J Sigma J^T for the belief's covariance, without densifying Sigma.
Mat covariance_sandwich(const Belief& b, const Mat& J);

double nlpd_plugin(const Belief& state, const Problem& pb, const Dataset& test);

// One set of S parameter draws is shared by every test point.
double nlpd_mc(const Belief& state, const Problem& pb, const Dataset& test, Index S, Rng& rng);

// Regression: closed form N(y | f(x, mu), R + F Sigma F^T). Classification: S
// logit draws from N(f(x, mu), F Sigma F^T) per test point, softmax averaged.
double nlpd_linearized(const Belief& state, const Problem& pb, const Dataset& test, Index S,
                       Rng& rng);

struct ModeMetrics {
  double nlpd;
  double miscl;  // NaN for regression
};

// NLPD and misclassification from one pass over the test set.
ModeMetrics evaluate(const Belief& state, const Problem& pb, const Dataset& test, PredMode mode,
                     Index S, Rng& rng);

double misclassification(const Belief& state, const Problem& pb, const Dataset& test,
                         PredMode mode, Index S, Rng& rng);

}  // namespace bong
