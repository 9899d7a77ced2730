#include "bong/gaussian.hpp"

#include <cmath>

namespace bong {

namespace {

void require_same_dim(Index a, Index b, const char* what) {
  if (a != b)
    throw ShapeError(std::string(what) + ": dimension " + std::to_string(a) + " vs " +
                     std::to_string(b));
}

double logdet_llt(const Eigen::LLT<Mat>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace

FamilyTag FamilyTag::parse(const std::string& name) {
  if (name == "fc") return {Structure::FC, Param::Natural};
  if (name == "fc_mom") return {Structure::FC, Param::Moment};
  if (name == "diag") return {Structure::Diag, Param::Natural};
  if (name == "diag_mom") return {Structure::Diag, Param::Moment};
  if (name == "dlr") return {Structure::DLR, Param::Natural};
  throw InvalidConfig("unknown family '" + name + "'");
}

std::string FamilyTag::name() const {
  switch (structure) {
    case Structure::FC: return param == Param::Natural ? "fc" : "fc_mom";
    case Structure::Diag: return param == Param::Natural ? "diag" : "diag_mom";
    case Structure::DLR: return "dlr";
  }
  return "?";
}

Structure structure_of(const Belief& b) {
  switch (b.index()) {
    case 0: return Structure::FC;
    case 1: return Structure::Diag;
    default: return Structure::DLR;
  }
}

Belief make_prior(const FamilyTag& fam, const Vec& mu0, double sigma0_sq, Index rank) {
  if (!(sigma0_sq > 0)) throw InvalidConfig("prior variance must be positive");
  const Index P = mu0.size();
  switch (fam.structure) {
    case Structure::FC: return GaussFC{mu0, sigma0_sq * Mat::Identity(P, P)};
    case Structure::Diag: return GaussDiag{mu0, Vec::Constant(P, sigma0_sq)};
    case Structure::DLR:
      if (rank < 1 || rank > P) throw InvalidConfig("DLR rank must be in [1, P]");
      return GaussDLR{mu0, Vec::Constant(P, 1.0 / sigma0_sq), Mat::Zero(P, rank)};
  }
  throw InvalidConfig("bad family");
}

Mat dense_precision(const Belief& b) {
  if (auto* s = std::get_if<GaussDLR>(&b)) {
    Mat prec = s->W * s->W.transpose();
    prec.diagonal() += s->ups;
    return prec;
  }
  if (auto* s = std::get_if<GaussDiag>(&b)) return s->sigma2.cwiseInverse().asDiagonal();
  const auto& s = std::get<GaussFC>(b);
  Eigen::LLT<Mat> llt(s.Sigma);
  if (llt.info() != Eigen::Success) throw SingularCovariance("covariance is not invertible");
  return llt.solve(Mat::Identity(s.Sigma.rows(), s.Sigma.cols()));
}

Mat dense_covariance(const Belief& b) {
  if (auto* s = std::get_if<GaussFC>(&b)) return s->Sigma;
  if (auto* s = std::get_if<GaussDiag>(&b)) return s->sigma2.asDiagonal();
  const auto& s = std::get<GaussDLR>(b);
  Mat prec = dense_precision(b);
  Eigen::LLT<Mat> llt(prec);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("DLR precision");
  return llt.solve(Mat::Identity(s.mu.size(), s.mu.size()));
}

NatFC to_natural(const GaussFC& s) {
  Eigen::LLT<Mat> llt(s.Sigma);
  if (llt.info() != Eigen::Success) throw SingularCovariance("covariance is not invertible");
  Mat prec = llt.solve(Mat::Identity(s.Sigma.rows(), s.Sigma.cols()));
  prec = (0.5 * (prec + prec.transpose())).eval();
  return {prec * s.mu, -0.5 * prec};
}

GaussFC from_natural(const NatFC& n) {
  Mat prec = -2.0 * n.psi2;
  Eigen::LLT<Mat> llt(prec);
  if (llt.info() != Eigen::Success) throw SingularCovariance("precision is not invertible");
  Mat Sigma = llt.solve(Mat::Identity(prec.rows(), prec.cols()));
  Sigma = (0.5 * (Sigma + Sigma.transpose())).eval();
  return {llt.solve(n.psi1), Sigma};
}

NatDiag to_natural(const GaussDiag& s) {
  if ((s.sigma2.array() == 0).any()) throw SingularCovariance("zero variance");
  Vec prec = s.sigma2.cwiseInverse();
  return {prec.cwiseProduct(s.mu), -0.5 * prec};
}

GaussDiag from_natural(const NatDiag& n) {
  Vec prec = -2.0 * n.psi2;
  if ((prec.array() == 0).any()) throw SingularCovariance("zero precision");
  Vec sigma2 = prec.cwiseInverse();
  return {sigma2.cwiseProduct(n.psi1), sigma2};
}

double kl_divergence(const Belief& q1, const Belief& q2) {
  const Index P = dim_of(q1);
  require_same_dim(P, dim_of(q2), "kl_divergence");

  if (q1.index() == 1 && q2.index() == 1) {
    const auto& a = std::get<GaussDiag>(q1);
    const auto& b = std::get<GaussDiag>(q2);
    Vec r = a.sigma2.cwiseQuotient(b.sigma2);
    Vec d = b.mu - a.mu;
    double quad = d.cwiseAbs2().cwiseQuotient(b.sigma2).sum();
    return 0.5 * (r.sum() + quad - double(P) - r.array().log().sum());
  }

  Mat S1 = dense_covariance(q1);
  Mat S2 = dense_covariance(q2);
  Eigen::LLT<Mat> l1(S1), l2(S2);
  if (l1.info() != Eigen::Success || l2.info() != Eigen::Success)
    throw NotPositiveDefinite("kl_divergence: covariance not positive definite");
  Vec d = mean_of(q2) - mean_of(q1);
  double tr = l2.solve(S1).trace();
  double quad = d.dot(l2.solve(d));
  double kl = 0.5 * (tr + quad - double(P) + logdet_llt(l2) - logdet_llt(l1));
  return std::max(kl, 0.0);
}

double dlr_sample_coeff(double lam) {
  if (lam <= 0) return 0.5;
  return -std::expm1(-0.5 * std::log1p(lam)) / lam;
}

Mat sample_from_normals(const Belief& b, const Mat& eps) {
  const Index P = dim_of(b);
  if (eps.rows() != P) throw ShapeError("sample: noise has wrong row count");
  Mat out;
  if (auto* s = std::get_if<GaussFC>(&b)) {
    Eigen::LLT<Mat> llt(s->Sigma);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("sample: Cholesky failed");
    out = llt.matrixL() * eps;
  } else if (auto* s = std::get_if<GaussDiag>(&b)) {
    out = s->sigma2.cwiseSqrt().asDiagonal() * eps;
  } else {
    const auto& d = std::get<GaussDLR>(b);
    Vec isq = d.ups.cwiseSqrt().cwiseInverse();
    Mat V = isq.asDiagonal() * d.W;
    Eigen::SelfAdjointEigenSolver<Mat> es(V.transpose() * V);
    Vec c = es.eigenvalues().unaryExpr([](double l) { return dlr_sample_coeff(l); });
    Mat VQ = V * es.eigenvectors();
    out = eps - VQ * (c.asDiagonal() * (VQ.transpose() * eps));
    out = isq.asDiagonal() * out;
  }
  out.colwise() += mean_of(b);
  return out;
}

Mat sample(const Belief& b, Index M, Rng& rng) {
  if (M < 1) throw InvalidConfig("sample: M must be >= 1");
  const Index P = dim_of(b);
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat eps(P, M);
  for (Index m = 0; m < M; ++m)
    for (Index i = 0; i < P; ++i) eps(i, m) = nd(rng);
  return sample_from_normals(b, eps);
}

GaussDLR dlr_svd_project(const Vec& ups_tilde, const Mat& W_tilde, Index R) {
  const Index P = W_tilde.rows(), K = W_tilde.cols();
  if (ups_tilde.size() != P) throw ShapeError("dlr_svd_project: ups/W row mismatch");
  if (R < 0 || K < R) throw ShapeError("dlr_svd_project: need K >= R");

  // Right singular vectors from the K x K Gram matrix; W~ V = U Lambda.
  Eigen::SelfAdjointEigenSolver<Mat> es(W_tilde.transpose() * W_tilde);
  Mat Vtop = es.eigenvectors().rightCols(R).rowwise().reverse();
  GaussDLR out;
  out.W = W_tilde * Vtop;
  out.ups = ups_tilde + W_tilde.rowwise().squaredNorm() - out.W.rowwise().squaredNorm();
  return out;
}

Mat dlr_woodbury_solve(const Vec& ups, const Mat& W, const Mat& V) {
  const Index P = ups.size();
  if (W.rows() != P || V.rows() != P) throw ShapeError("dlr_woodbury_solve: row mismatch");
  Vec inv = ups.cwiseInverse();
  Mat out = inv.asDiagonal() * V;
  if (W.cols() == 0) return out;
  Mat UiW = inv.asDiagonal() * W;
  Mat inner = W.transpose() * UiW;
  inner.diagonal().array() += 1.0;
  Eigen::LLT<Mat> llt(inner);
  if (llt.info() != Eigen::Success || !all_finite(inner))
    throw SingularInnerSystem("Woodbury inner system is not positive definite");
  out.noalias() -= UiW * llt.solve(W.transpose() * out);
  return out;
}

void validate(GaussFC& s, const ValidationPolicy& pol) {
  s.Sigma = (0.5 * (s.Sigma + s.Sigma.transpose())).eval();
  if (!s.mu.allFinite() || !all_finite(s.Sigma))
    throw NotPositiveDefinite("non-finite entries in FC state");
  Eigen::LLT<Mat> llt(s.Sigma);
  if (llt.info() == Eigen::Success) return;
  if (pol.clamp_variance) {
    Eigen::SelfAdjointEigenSolver<Mat> es(s.Sigma);
    Vec ev = es.eigenvalues().cwiseMax(1e-12);
    s.Sigma = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    s.Sigma = (0.5 * (s.Sigma + s.Sigma.transpose())).eval();
    return;
  }
  if (pol.jitter > 0) {
    s.Sigma.diagonal().array() += pol.jitter;
    if (Eigen::LLT<Mat>(s.Sigma).info() == Eigen::Success) return;
  }
  throw NotPositiveDefinite("covariance is not positive definite");
}

namespace {

void validate_positive(Vec& v, const ValidationPolicy& pol, const char* what) {
  if (!v.allFinite()) throw NotPositiveDefinite(std::string("non-finite ") + what);
  if ((v.array() > 0).all()) return;
  if (pol.clamp_variance) {
    v = v.cwiseMax(1e-12);
    return;
  }
  if (pol.jitter > 0) {
    v.array() += pol.jitter;
    if ((v.array() > 0).all()) return;
  }
  throw NotPositiveDefinite(std::string("non-positive ") + what);
}

}  // namespace

void validate(GaussDiag& s, const ValidationPolicy& pol) {
  if (!s.mu.allFinite()) throw NotPositiveDefinite("non-finite mean");
  validate_positive(s.sigma2, pol, "variance");
}

void validate(GaussDLR& s, const ValidationPolicy& pol) {
  if (!s.mu.allFinite() || !all_finite(s.W)) throw NotPositiveDefinite("non-finite DLR state");
  validate_positive(s.ups, pol, "diagonal precision");
}

void validate(Belief& b, const ValidationPolicy& pol) {
  std::visit([&](auto& s) { validate(s, pol); }, b);
}

}  // namespace bong
