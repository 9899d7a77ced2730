#pragma once

#include <functional>
#include <vector>

#include "bong/common.hpp"

// Dense, deliberately naive reference computations for tests. Nothing here
// calls into the updaters or the Gaussian family code.
namespace bong::oracle {

// Conjugate prior for y ~ N(theta, I) in natural coordinates:
// p(theta) propto exp(theta^T chi - nu/2 theta^T theta), i.e. N(chi/nu, I/nu).
struct ConjugateModel {
  Vec chi;
  double nu = 1.0;
};

ConjugateModel exact_conjugate_update(const ConjugateModel& m, const Vec& y);
void conjugate_to_gaussian(const ConjugateModel& m, Vec& mu, Mat& Sigma);

// Posterior of theta ~ N(mu0, Sigma0) after observations y_t ~ N(H_t theta, R).
void batch_linear_gaussian_posterior(const Vec& mu0, const Mat& Sigma0, const std::vector<Mat>& Hs,
                                     const std::vector<Vec>& ys, const Mat& R, Vec& mu, Mat& Sigma);

// Covariance-form Kalman measurement update: mu += K (y - yhat), Sigma -= K H Sigma.
void kalman_update(Vec& mu, Mat& Sigma, const Mat& H, const Mat& R, const Vec& y, const Vec& yhat);

// Information form: Sigma'^-1 = Sigma^-1 + H^T R^-1 H, mu' = mu + Sigma' H^T R^-1 (y - yhat).
void kalman_update_information(Vec& mu, Mat& Sigma, const Mat& H, const Mat& R, const Vec& y,
                               const Vec& yhat);

using ScalarFn = std::function<double(const Vec&)>;
using VectorFn = std::function<Vec(const Vec&)>;

Vec fd_gradient(const ScalarFn& fn, const Vec& x, double step = 1e-6);
Mat fd_hessian(const ScalarFn& fn, const Vec& x, double step = 1e-4);
// Rows are d fn_c / d x.
Mat fd_jacobian(const VectorFn& fn, const Vec& x, double step = 1e-6);

// Natural-gradient step in the moment chart (mu, vec Sigma) using the explicit
// Fisher blockdiag(Sigma^-1, 1/2 Sigma^-1 kron Sigma^-1). The Euclidean gradient
// is (g, 1/2 G). Builds a (P + P^2) square system, so P <= 4.
void dense_fisher_ngd_step(Vec& mu, Mat& Sigma, const Vec& g, const Mat& G, double lr = 1.0);

// -log N(y | H mu + b, R + H Sigma H^T)
double gaussian_predictive_nlpd(const Vec& mu, const Mat& Sigma, const Mat& H, const Vec& b,
                                const Mat& R, const Vec& y);

// KL(N(m1,S1) || N(m2,S2)) by dense determinants and inverses.
double gaussian_kl(const Vec& m1, const Mat& S1, const Vec& m2, const Mat& S2);

}  // namespace bong::oracle
