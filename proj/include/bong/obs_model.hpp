#pragma once

#include "bong/common.hpp"

namespace bong {

// Likelihood p(y | f). Gaussian: f is the mean and V = R. Categorical: f are
// the logits, the natural parameter of the softmax family.
class ObsModel {
 public:
  enum class Kind { Gaussian, Categorical };

  static ObsModel gaussian(const Mat& R);
  static ObsModel gaussian(double r) { return gaussian(Mat::Constant(1, 1, r)); }
  static ObsModel categorical(Index C);

  Kind kind() const { return kind_; }
  Index dim() const { return C_; }
  bool is_classification() const { return kind_ == Kind::Categorical; }
  const Mat& R() const { return R_; }

  double log_partition(const Vec& f) const;
  Vec mean_map(const Vec& f) const;
  Mat cond_cov(const Vec& f) const;
  double loglik(const Vec& y, const Vec& f) const;
  Vec loglik_grad_f(const Vec& y, const Vec& f) const;

  // Jitter used by regularized_Rinv when the caller passes a negative value:
  // 1e-8 * tr(V) / C for Categorical, 0 for Gaussian.
  double default_jitter(const Vec& f) const;

 private:
  Kind kind_ = Kind::Gaussian;
  Index C_ = 1;
  Mat R_, Rinv_;
  double logdetR_ = 0;
};

struct RinvFactor {
  Mat Rinv;
  Mat A;  // A^T A = Rinv
};

// Inverts cond_cov(f) + jitter I. A negative jitter selects default_jitter(f).
RinvFactor regularized_Rinv(const ObsModel& model, const Vec& f, double jitter = -1.0);

Vec softmax(const Vec& f);
double logsumexp(const Vec& f);

}  // namespace bong
