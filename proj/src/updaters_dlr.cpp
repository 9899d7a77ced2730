#include "bong/updaters.hpp"

#include <cmath>

namespace bong::detail {

namespace {

Mat hcat(std::initializer_list<const Mat*> blocks) {
  Index rows = (*blocks.begin())->rows(), cols = 0;
  for (const Mat* b : blocks) cols += b->cols();
  Mat out(rows, cols);
  Index c = 0;
  for (const Mat* b : blocks) {
    out.middleCols(c, b->cols()) = *b;
    c += b->cols();
  }
  return out;
}

GaussDLR bong_dlr(const GaussDLR& prior, const Mat& B, const Vec& g) {
  const Index R = prior.W.cols();
  Mat Wt = hcat({&prior.W, &B});
  GaussDLR out = dlr_svd_project(prior.ups, Wt, R);
  out.mu = prior.mu + dlr_woodbury_solve(prior.ups, Wt, g);
  return out;
}

GaussDLR blr_dlr(const GaussDLR& prior, const GaussDLR& it, const Mat& B, const Vec& g, double a) {
  if (a > 1.0) throw InvalidConfig("BLR with the DLR family needs lr <= 1");
  const Index R = prior.W.cols();
  Vec ups_t = (1.0 - a) * it.ups + a * prior.ups;
  Mat W1 = std::sqrt(1.0 - a) * it.W;
  Mat W0 = std::sqrt(a) * prior.W;
  Mat Bs = std::sqrt(a) * B;
  Mat Wt = hcat({&W1, &W0, &Bs});
  Vec rhs = dlr_precision_times(prior.ups, prior.W, prior.mu - it.mu) + g;
  GaussDLR out = dlr_svd_project(ups_t, Wt, R);
  out.mu = it.mu + a * dlr_woodbury_solve(ups_t, Wt, rhs);
  return out;
}

GaussDLR bog_dlr(const GaussDLR& prior, const Mat& B, const Vec& g, double a) {
  // Sigma B via Woodbury; G = -B B^T
  Mat SB = dlr_woodbury_solve(prior.ups, prior.W, B);
  GaussDLR out;
  out.mu = prior.mu + a * g;
  out.ups = prior.ups + 0.5 * a * SB.rowwise().squaredNorm();
  out.W = prior.W + a * SB * (SB.transpose() * prior.W);
  return out;
}

GaussDLR bbb_dlr(const GaussDLR& prior, const GaussDLR& it, const Mat& B, const Vec& g, double a) {
  const Vec& ups = it.ups;
  const Mat& W = it.W;
  const Index R = W.cols();

  // X = Diag(d) + U S U^T with U = [W0, W, B], S = diag(+1, -1, +1)
  const Vec d = prior.ups - ups;
  Mat U = hcat({&prior.W, &W, &B});
  Vec s = Vec::Ones(U.cols());
  s.segment(prior.W.cols(), R).setConstant(-1.0);

  // Sigma U and Sigma W through Woodbury
  Mat SU = dlr_woodbury_solve(ups, W, U);
  Mat SW = dlr_woodbury_solve(ups, W, W);

  // low-rank part
  Vec diag_lr = SU.cwiseAbs2() * s;
  Mat lr_W = SU * (s.asDiagonal() * (SU.transpose() * W));

  // diagonal part: Sigma = Ups^-1 - V M V^T, V = Ups^-1 W, M = (I + W^T Ups^-1 W)^-1
  const Vec inv = ups.cwiseInverse();
  Mat V = inv.asDiagonal() * W;
  Mat inner = W.transpose() * V;
  inner.diagonal().array() += 1.0;
  Eigen::LLT<Mat> llt(inner);
  if (llt.info() != Eigen::Success) throw SingularInnerSystem("BBB DLR inner system");
  Mat M = llt.solve(Mat::Identity(R, R));
  Mat VM = V * M;
  Vec diag_VMVt = VM.cwiseProduct(V).rowwise().sum();
  Mat N = M * (V.transpose() * d.asDiagonal() * V) * M;
  Vec diag_VNVt = (V * N).cwiseProduct(V).rowwise().sum();
  Vec diag_d = d.cwiseProduct(inv.cwiseAbs2()) - 2.0 * d.cwiseProduct(inv).cwiseProduct(diag_VMVt) +
               diag_VNVt;
  Mat d_W = dlr_woodbury_solve(ups, W, Mat(d.asDiagonal() * SW));

  GaussDLR out;
  out.mu = it.mu + a * dlr_precision_times(prior.ups, prior.W, prior.mu - it.mu) + a * g;
  out.ups = ups + 0.5 * a * (diag_d + diag_lr);
  out.W = W + a * (d_W + lr_W);
  return out;
}

}  // namespace

GaussDLR dlr_step(Algorithm alg, const GaussDLR& prior, const GaussDLR& it,
                  const GradEstimate& est, double lr) {
  if (est.g.size() != prior.mu.size()) throw ShapeError("estimate/state dimension mismatch");
  if (!est.is_low_rank())
    throw EstimatorIncompatible("the DLR family needs a low-rank (EF or linearized) estimate");
  const Mat B = est.columns();
  switch (alg) {
    case Algorithm::BONG: return bong_dlr(prior, B, est.g);
    case Algorithm::BLR: return blr_dlr(prior, it, B, est.g, lr);
    case Algorithm::BOG: return bog_dlr(prior, B, est.g, lr);
    case Algorithm::BBB: return bbb_dlr(prior, it, B, est.g, lr);
  }
  throw InvalidConfig("bad algorithm");
}

}  // namespace bong::detail
