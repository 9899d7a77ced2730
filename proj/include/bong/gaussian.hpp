#pragma once

#include <variant>

#include "bong/common.hpp"

namespace bong {

enum class Structure { FC, Diag, DLR };
enum class Param { Natural, Moment };

struct FamilyTag {
  Structure structure = Structure::FC;
  Param param = Param::Natural;

  static FamilyTag parse(const std::string& name);  // fc|fc_mom|diag|diag_mom|dlr
  std::string name() const;
};

struct GaussFC {
  Vec mu;
  Mat Sigma;
};

struct GaussDiag {
  Vec mu;
  Vec sigma2;
};

// Precision Diag(ups) + W W^T.
struct GaussDLR {
  Vec mu;
  Vec ups;
  Mat W;
};

using Belief = std::variant<GaussFC, GaussDiag, GaussDLR>;

inline const Vec& mean_of(const Belief& b) {
  return std::visit([](const auto& s) -> const Vec& { return s.mu; }, b);
}
inline Index dim_of(const Belief& b) { return mean_of(b).size(); }
Structure structure_of(const Belief& b);

// Isotropic prior N(mu0, sigma0_sq I) in the given family. DLR starts with W = 0.
Belief make_prior(const FamilyTag& fam, const Vec& mu0, double sigma0_sq, Index rank = 0);

// Dense views, intended for tests and small P.
Mat dense_covariance(const Belief& b);
Mat dense_precision(const Belief& b);

struct NatFC {
  Vec psi1;  // Sigma^-1 mu
  Mat psi2;  // -1/2 Sigma^-1
};
struct NatDiag {
  Vec psi1;
  Vec psi2;
};

NatFC to_natural(const GaussFC& s);
GaussFC from_natural(const NatFC& n);
NatDiag to_natural(const GaussDiag& s);
GaussDiag from_natural(const NatDiag& n);

double kl_divergence(const Belief& q1, const Belief& q2);

// M draws as columns of a P x M matrix.
Mat sample(const Belief& b, Index M, Rng& rng);
Mat sample_from_normals(const Belief& b, const Mat& eps);

// Multiplier applied along the eigendirection with eigenvalue lam of V^T V in
// the fast DLR sampler; continuous at lam = 0 with value 1/2.
double dlr_sample_coeff(double lam);

GaussDLR dlr_svd_project(const Vec& ups_tilde, const Mat& W_tilde, Index R);

// (Diag(ups) + W W^T)^-1 V for a vector or a block of columns.
Mat dlr_woodbury_solve(const Vec& ups, const Mat& W, const Mat& V);
inline Vec dlr_woodbury_solve(const Vec& ups, const Mat& W, const Vec& v) {
  return dlr_woodbury_solve(ups, W, Mat(v)).col(0);
}

// (Diag(ups) + W W^T) v
inline Vec dlr_precision_times(const Vec& ups, const Mat& W, const Vec& v) {
  Vec out = ups.cwiseProduct(v);
  if (W.cols() > 0) out.noalias() += W * (W.transpose() * v);
  return out;
}

// How an updater treats a state that leaves the valid set.
struct ValidationPolicy {
  double jitter = 0.0;          // > 0 adds jitter*I (FC) or jitter (Diag/DLR) and retries
  bool clamp_variance = false;  // floor eigenvalues / variances at 1e-12
};

// Symmetrizes FC covariances, then checks positivity. Throws NotPositiveDefinite
// unless the policy can repair the state.
void validate(GaussFC& s, const ValidationPolicy& pol = {});
void validate(GaussDiag& s, const ValidationPolicy& pol = {});
void validate(GaussDLR& s, const ValidationPolicy& pol = {});
void validate(Belief& b, const ValidationPolicy& pol = {});

}  // namespace bong
