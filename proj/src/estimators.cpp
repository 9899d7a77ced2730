#include "bong/estimators.hpp"

#include <cmath>

namespace bong {

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "mc-hess") return EstimatorKind::MCHess;
  if (name == "mc-ef") return EstimatorKind::MCEF;
  if (name == "lin-hess") return EstimatorKind::LinHess;
  if (name == "lin-ef") return EstimatorKind::LinEF;
  throw InvalidConfig("unknown estimator '" + name + "'");
}

std::string estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::MCHess: return "mc-hess";
    case EstimatorKind::MCEF: return "mc-ef";
    case EstimatorKind::LinHess: return "lin-hess";
    case EstimatorKind::LinEF: return "lin-ef";
  }
  return "?";
}

Mat GradEstimate::dense() const {
  if (auto* d = std::get_if<DenseG>(&G)) return d->G;
  if (auto* d = std::get_if<DiagG>(&G)) return Mat(d->d.asDiagonal());
  Mat B = columns();
  return -B * B.transpose();
}

Vec GradEstimate::diag() const {
  if (auto* d = std::get_if<DenseG>(&G)) return d->G.diagonal();
  if (auto* d = std::get_if<DiagG>(&G)) return d->d;
  if (auto* l = std::get_if<LinHessG>(&G)) return -(l->A * l->H).colwise().squaredNorm().transpose();
  return -std::get<NegOuterCols>(G).B.rowwise().squaredNorm();
}

Mat GradEstimate::columns() const {
  if (auto* c = std::get_if<NegOuterCols>(&G)) return c->B;
  if (auto* l = std::get_if<LinHessG>(&G)) return l->H.transpose() * l->A.transpose();
  throw EstimatorIncompatible("estimate has no low-rank column form");
}

Mat draw_mc_samples(const Belief& state, const EstimatorCfg& cfg, Rng& rng) {
  if (cfg.M < 1) throw InvalidConfig("MC estimators need M >= 1");
  if (!cfg.antithetic) return sample(state, cfg.M, rng);
  if (cfg.M % 2 != 0) throw InvalidConfig("antithetic sampling needs an even M");
  const Index half = cfg.M / 2;
  Mat base = sample(state, half, rng);
  const Vec& mu = mean_of(state);
  Mat out(mu.size(), cfg.M);
  for (Index m = 0; m < half; ++m) {
    out.col(2 * m) = base.col(m);
    out.col(2 * m + 1) = 2.0 * mu - base.col(m);
  }
  return out;
}

namespace {

Vec mean_columns(const Mat& m) {
  // ordered sum, independent of how the columns were produced
  Vec s = Vec::Zero(m.rows());
  for (Index j = 0; j < m.cols(); ++j) s += m.col(j);
  return s / double(m.cols());
}

}  // namespace

GradEstimate grad_mc_hess(const Belief& state, const Problem& pb, const Vec& x, const Vec& y,
                          const EstimatorCfg& cfg, Rng& rng) {
  const Structure st = structure_of(state);
  if (st == Structure::DLR)
    throw EstimatorIncompatible("mc-hess produces a dense or diagonal Hessian; DLR needs columns");
  const Index P = dim_of(state);
  if (st == Structure::FC && P > cfg.hessian_cap)
    throw CapExceeded("mc-hess dense Hessian for P=" + std::to_string(P));

  Mat thetas = draw_mc_samples(state, cfg, rng);
  const Exec ex = default_exec();
  GradEstimate est;
  est.g = mean_columns(sample_gradients(pb.spec, pb.model, thetas, x, y, ex));

  if (st == Structure::FC) {
    Mat G = Mat::Zero(P, P);
    for (Index m = 0; m < thetas.cols(); ++m)
      G += fd_hessian_loglik(pb.spec, pb.model, thetas.col(m), x, y, ex);
    est.G = DenseG{G / double(thetas.cols())};
  } else {
    const Index N = cfg.N > 0 ? cfg.N : 10 * cfg.M;
    // probes for every sample are drawn up front so the stream is order-fixed
    std::bernoulli_distribution coin(0.5);
    std::vector<Mat> probes(thetas.cols());
    for (auto& Z : probes) {
      Z.resize(P, N);
      for (Index j = 0; j < N; ++j)
        for (Index i = 0; i < P; ++i) Z(i, j) = coin(rng) ? 1.0 : -1.0;
    }
    Vec d = Vec::Zero(P);
    for (Index m = 0; m < thetas.cols(); ++m) {
      Mat HZ = hessian_vector_products(pb.spec, pb.model, thetas.col(m), x, y, probes[m], ex);
      Vec dm = Vec::Zero(P);
      for (Index j = 0; j < N; ++j) dm += probes[m].col(j).cwiseProduct(HZ.col(j));
      d += dm / double(N);
    }
    est.G = DiagG{d / double(thetas.cols())};
  }
  return est;
}

GradEstimate grad_mc_ef(const Belief& state, const Problem& pb, const Vec& x, const Vec& y,
                        const EstimatorCfg& cfg, Rng& rng) {
  Mat thetas = draw_mc_samples(state, cfg, rng);
  Mat grads = sample_gradients(pb.spec, pb.model, thetas, x, y, default_exec());
  GradEstimate est;
  est.g = mean_columns(grads);
  est.G = NegOuterCols{grads / std::sqrt(double(grads.cols()))};
  return est;
}

GradEstimate grad_lin_hess(const Belief& state, const Problem& pb, const Vec& x, const Vec& y,
                           const EstimatorCfg& cfg) {
  const Vec& mu = mean_of(state);
  Vec f = forward(pb.spec, mu, x);
  Vec yhat = pb.model.mean_map(f);
  RinvFactor rf = regularized_Rinv(pb.model, f, cfg.obs_jitter);
  Mat H = jacobian_h(pb.spec, pb.model, mu, x);
  GradEstimate est;
  est.g = H.transpose() * (rf.Rinv * (y - yhat));
  est.G = LinHessG{std::move(H), std::move(rf.A), std::move(yhat)};
  return est;
}

GradEstimate grad_lin_ef(const Belief& state, const Problem& pb, const Vec& x, const Vec& y,
                         const EstimatorCfg& cfg) {
  const Vec& mu = mean_of(state);
  Vec f = forward(pb.spec, mu, x);
  Vec yhat = pb.model.mean_map(f);
  RinvFactor rf = regularized_Rinv(pb.model, f, cfg.obs_jitter);
  // gradient of -1/2 (y-h)^T R^-1 (y-h) is J_h^T R^-1 (y-h) = J_f^T V R^-1 (y-h)
  Vec cot = rf.Rinv * (y - yhat);
  if (pb.model.kind() == ObsModel::Kind::Categorical) cot = pb.model.cond_cov(f) * cot;
  GradEstimate est;
  est.g = vjp(pb.spec, mu, x, cot);
  est.G = NegOuterCols{Mat(est.g)};
  return est;
}

GradEstimate estimate(const Belief& state, const Problem& pb, const Vec& x, const Vec& y,
                      const EstimatorCfg& cfg, Rng& rng) {
  switch (cfg.kind) {
    case EstimatorKind::MCHess: return grad_mc_hess(state, pb, x, y, cfg, rng);
    case EstimatorKind::MCEF: return grad_mc_ef(state, pb, x, y, cfg, rng);
    case EstimatorKind::LinHess: return grad_lin_hess(state, pb, x, y, cfg);
    case EstimatorKind::LinEF: return grad_lin_ef(state, pb, x, y, cfg);
  }
  throw InvalidConfig("bad estimator kind");
}

}  // namespace bong
