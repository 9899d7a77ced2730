#include "bong/obs_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace bong {

Vec softmax(const Vec& f) {
  Vec e = (f.array() - f.maxCoeff()).exp();
  return e / e.sum();
}

double logsumexp(const Vec& f) {
  double m = f.maxCoeff();
  return m + std::log((f.array() - m).exp().sum());
}

ObsModel ObsModel::gaussian(const Mat& R) {
  if (R.rows() != R.cols() || R.rows() < 1) throw ShapeError("observation covariance must be square");
  Eigen::LLT<Mat> llt(R);
  if (llt.info() != Eigen::Success) throw SingularObservationCov("R is not positive definite");
  ObsModel m;
  m.kind_ = Kind::Gaussian;
  m.C_ = R.rows();
  m.R_ = R;
  m.Rinv_ = llt.solve(Mat::Identity(m.C_, m.C_));
  m.logdetR_ = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return m;
}

ObsModel ObsModel::categorical(Index C) {
  if (C < 2) throw InvalidConfig("categorical model needs C >= 2");
  ObsModel m;
  m.kind_ = Kind::Categorical;
  m.C_ = C;
  return m;
}

double ObsModel::log_partition(const Vec& f) const {
  if (kind_ == Kind::Gaussian) return 0.5 * f.dot(Rinv_ * f);
  return logsumexp(f);
}

Vec ObsModel::mean_map(const Vec& f) const {
  if (kind_ == Kind::Gaussian) return f;
  return softmax(f);
}

Mat ObsModel::cond_cov(const Vec& f) const {
  if (kind_ == Kind::Gaussian) return R_;
  Vec p = softmax(f);
  Mat V = -p * p.transpose();
  V.diagonal() += p;
  return V;
}

double ObsModel::loglik(const Vec& y, const Vec& f) const {
  if (y.size() != C_ || f.size() != C_) throw ShapeError("loglik: size mismatch");
  if (kind_ == Kind::Gaussian) {
    Vec r = y - f;
    return -0.5 * (double(C_) * std::log(2 * std::numbers::pi) + logdetR_ + r.dot(Rinv_ * r));
  }
  return y.dot(f) - logsumexp(f);
}

Vec ObsModel::loglik_grad_f(const Vec& y, const Vec& f) const {
  if (y.size() != C_ || f.size() != C_) throw ShapeError("loglik_grad_f: size mismatch");
  if (kind_ == Kind::Gaussian) return Rinv_ * (y - f);
  return y - softmax(f);
}

double ObsModel::default_jitter(const Vec& f) const {
  if (kind_ == Kind::Gaussian) return 0.0;
  return 1e-8 * cond_cov(f).trace() / double(C_);
}

RinvFactor regularized_Rinv(const ObsModel& model, const Vec& f, double jitter) {
  if (jitter < 0) jitter = model.default_jitter(f);
  Mat V = model.cond_cov(f);
  V.diagonal().array() += jitter;
  if (!V.allFinite()) throw SingularObservationCov("conditional covariance is not finite");
  // Factor through the eigenbasis: the softmax covariance is near-singular and
  // a Cholesky of its inverse would spread that conditioning over every entry.
  Eigen::SelfAdjointEigenSolver<Mat> es(V);
  const Vec& lam = es.eigenvalues();
  const double floor = double(V.rows()) * std::numeric_limits<double>::epsilon() * lam.maxCoeff();
  if (!(lam.minCoeff() > floor))
    throw SingularObservationCov("conditional covariance is singular after jitter");
  RinvFactor out;
  out.A = lam.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  out.Rinv = out.A.transpose() * out.A;
  return out;
}

}  // namespace bong
