#include "bong/oracles.hpp"

#include <cmath>
#include <numbers>

namespace bong::oracle {

ConjugateModel exact_conjugate_update(const ConjugateModel& m, const Vec& y) {
  return {m.chi + y, m.nu + 1.0};
}

void conjugate_to_gaussian(const ConjugateModel& m, Vec& mu, Mat& Sigma) {
  mu = m.chi / m.nu;
  Sigma = Mat::Identity(m.chi.size(), m.chi.size()) / m.nu;
}

void batch_linear_gaussian_posterior(const Vec& mu0, const Mat& Sigma0, const std::vector<Mat>& Hs,
                                     const std::vector<Vec>& ys, const Mat& R, Vec& mu, Mat& Sigma) {
  Mat Rinv = R.inverse();
  Mat prec = Sigma0.inverse();
  Vec eta = prec * mu0;
  for (std::size_t t = 0; t < Hs.size(); ++t) {
    prec += Hs[t].transpose() * Rinv * Hs[t];
    eta += Hs[t].transpose() * Rinv * ys[t];
  }
  Sigma = prec.inverse();
  Sigma = (0.5 * (Sigma + Sigma.transpose())).eval();
  mu = Sigma * eta;
}

void kalman_update(Vec& mu, Mat& Sigma, const Mat& H, const Mat& R, const Vec& y, const Vec& yhat) {
  Mat S = R + H * Sigma * H.transpose();
  Eigen::FullPivLU<Mat> lu(S);
  if (!lu.isInvertible()) throw SingularObservationCov("innovation covariance is singular");
  Mat K = Sigma * H.transpose() * lu.inverse();
  mu = mu + K * (y - yhat);
  Sigma = Sigma - K * H * Sigma;
  Sigma = (0.5 * (Sigma + Sigma.transpose())).eval();
}

void kalman_update_information(Vec& mu, Mat& Sigma, const Mat& H, const Mat& R, const Vec& y,
                               const Vec& yhat) {
  Mat Rinv = R.inverse();
  Mat prec = Sigma.inverse() + H.transpose() * Rinv * H;
  Sigma = prec.inverse();
  Sigma = (0.5 * (Sigma + Sigma.transpose())).eval();
  mu = mu + Sigma * H.transpose() * Rinv * (y - yhat);
}

Vec fd_gradient(const ScalarFn& fn, const Vec& x, double step) {
  Vec g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a(i) += step;
    b(i) -= step;
    g(i) = (fn(a) - fn(b)) / (a(i) - b(i));
  }
  return g;
}

Mat fd_hessian(const ScalarFn& fn, const Vec& x, double step) {
  const Index n = x.size();
  Mat H(n, n);
  const double f0 = fn(x);
  for (Index i = 0; i < n; ++i) {
    Vec a = x, b = x;
    a(i) += step;
    b(i) -= step;
    H(i, i) = (fn(a) - 2 * f0 + fn(b)) / (step * step);
    for (Index j = 0; j < i; ++j) {
      Vec pp = x, pm = x, mp = x, mm = x;
      pp(i) += step; pp(j) += step;
      pm(i) += step; pm(j) -= step;
      mp(i) -= step; mp(j) += step;
      mm(i) -= step; mm(j) -= step;
      H(i, j) = H(j, i) = (fn(pp) - fn(pm) - fn(mp) + fn(mm)) / (4 * step * step);
    }
  }
  return 0.5 * (H + H.transpose());
}

Mat fd_jacobian(const VectorFn& fn, const Vec& x, double step) {
  Vec f0 = fn(x);
  Mat J(f0.size(), x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a(i) += step;
    b(i) -= step;
    J.col(i) = (fn(a) - fn(b)) / (a(i) - b(i));
  }
  return J;
}

void dense_fisher_ngd_step(Vec& mu, Mat& Sigma, const Vec& g, const Mat& G, double lr) {
  const Index P = mu.size();
  if (P > 4) throw CapExceeded("explicit Fisher limited to P <= 4");
  const Index n = P + P * P;
  Mat Sinv = Sigma.inverse();
  Mat F = Mat::Zero(n, n);
  F.topLeftCorner(P, P) = Sinv;
  // vec is column-major: entry (i, j) lives at j*P + i
  for (Index a = 0; a < P; ++a)
    for (Index b = 0; b < P; ++b)
      for (Index c = 0; c < P; ++c)
        for (Index d = 0; d < P; ++d)
          F(P + b * P + a, P + d * P + c) = 0.5 * Sinv(b, d) * Sinv(a, c);
  Vec grad(n);
  grad.head(P) = g;
  for (Index j = 0; j < P; ++j)
    for (Index i = 0; i < P; ++i) grad(P + j * P + i) = 0.5 * G(i, j);
  Vec step = F.fullPivLu().solve(grad);
  mu += lr * step.head(P);
  for (Index j = 0; j < P; ++j)
    for (Index i = 0; i < P; ++i) Sigma(i, j) += lr * step(P + j * P + i);
}

double gaussian_predictive_nlpd(const Vec& mu, const Mat& Sigma, const Mat& H, const Vec& b,
                                const Mat& R, const Vec& y) {
  Mat S = R + H * Sigma * H.transpose();
  Vec r = y - H * mu - b;
  const double C = double(y.size());
  return 0.5 * (C * std::log(2 * std::numbers::pi) + std::log(S.determinant()) +
                r.dot(S.inverse() * r));
}

double gaussian_kl(const Vec& m1, const Mat& S1, const Vec& m2, const Mat& S2) {
  Mat S2inv = S2.inverse();
  Vec d = m2 - m1;
  return 0.5 * ((S2inv * S1).trace() + d.dot(S2inv * d) - double(m1.size()) +
                std::log(S2.determinant()) - std::log(S1.determinant()));
}

}  // namespace bong::oracle
