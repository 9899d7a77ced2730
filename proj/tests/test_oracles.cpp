#include "doctest.h"

#include <cmath>

#include "bong/oracles.hpp"
#include "test_util.hpp"

using namespace bong;
using namespace bong::testing;

TEST_CASE("conjugate update") {
  oracle::ConjugateModel m{Vec::Zero(1), 1.0};
  m = oracle::exact_conjugate_update(m, Vec::Constant(1, 2.0));
  CHECK(m.chi(0) == 2.0);
  CHECK(m.nu == 2.0);

  Vec mu;
  Mat S;
  oracle::conjugate_to_gaussian(m, mu, S);
  CHECK(mu(0) == doctest::Approx(1.0));
  CHECK(S(0, 0) == doctest::Approx(0.5));

  oracle::ConjugateModel acc{Vec::Zero(2), 1.0};
  Vec sum = Vec::Zero(2);
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    Vec y = random_vec(2, rng);
    sum += y;
    acc = oracle::exact_conjugate_update(acc, y);
  }
  CHECK(max_abs(acc.chi - sum) < 1e-14);
  CHECK(acc.nu == 11.0);
}

TEST_CASE("batch posterior agrees with the conjugate pair") {
  // y ~ N(theta, 1) is the linear-Gaussian model with H = I, R = I.
  Rng rng(2);
  const Index D = 3;
  oracle::ConjugateModel m{Vec::Zero(D), 2.0};
  std::vector<Mat> Hs;
  std::vector<Vec> ys;
  for (int t = 0; t < 5; ++t) {
    Vec y = random_vec(D, rng);
    m = oracle::exact_conjugate_update(m, y);
    Hs.push_back(Mat::Identity(D, D));
    ys.push_back(y);
  }
  Vec mu_c, mu_b;
  Mat S_c, S_b;
  oracle::conjugate_to_gaussian(m, mu_c, S_c);
  oracle::batch_linear_gaussian_posterior(Vec::Zero(D), 0.5 * Mat::Identity(D, D), Hs, ys,
                                          Mat::Identity(D, D), mu_b, S_b);
  CHECK(max_abs(mu_c - mu_b) < 1e-12);
  CHECK(max_abs(S_c - S_b) < 1e-12);
}

TEST_CASE("Kalman update") {
  SUBCASE("scalar") {
    Vec mu = Vec::Zero(1);
    Mat S = Mat::Identity(1, 1);
    oracle::kalman_update(mu, S, Mat::Identity(1, 1), Mat::Identity(1, 1), Vec::Constant(1, 2.0),
                          Vec::Zero(1));
    CHECK(mu(0) == doctest::Approx(1.0));
    CHECK(S(0, 0) == doctest::Approx(0.5));
  }
  SUBCASE("H = 0 leaves the state") {
    Rng rng(3);
    Vec mu = random_vec(4, rng);
    Mat S = random_spd(4, rng);
    Vec mu0 = mu;
    Mat S0 = S;
    oracle::kalman_update(mu, S, Mat::Zero(2, 4), Mat::Identity(2, 2), random_vec(2, rng),
                          Vec::Zero(2));
    CHECK(max_abs(mu - mu0) == 0.0);
    CHECK(max_abs(S - S0) < 1e-15);
  }
  SUBCASE("covariance and information forms agree") {
    Rng rng(4);
    for (int k = 0; k < 20; ++k) {
      Vec mu = random_vec(5, rng), mu2;
      Mat S = random_spd(5, rng), S2;
      mu2 = mu;
      S2 = S;
      Mat H = random_mat(2, 5, rng);
      Mat R = random_spd(2, rng);
      Vec y = random_vec(2, rng), yhat = random_vec(2, rng);
      oracle::kalman_update(mu, S, H, R, y, yhat);
      oracle::kalman_update_information(mu2, S2, H, R, y, yhat);
      CHECK(max_abs(mu - mu2) < 1e-10);
      CHECK(max_abs(S - S2) < 1e-10);
    }
  }
}

TEST_CASE("finite differences") {
  Mat A(2, 2);
  A << 2.0, 0.5, 0.5, 1.0;
  Vec b(2);
  b << 1.0, -1.0;
  auto quad = [&](const Vec& x) { return 0.5 * x.dot(A * x) + b.dot(x); };
  Vec x(2);
  x << 0.3, -0.7;
  CHECK(max_abs(oracle::fd_gradient(quad, x) - (A * x + b)) < 1e-6);
  CHECK(max_abs(oracle::fd_hessian(quad, x) - A) < 1e-6);

  auto s = [](const Vec& v) { return std::sin(v(0)); };
  CHECK(std::abs(oracle::fd_gradient(s, Vec::Zero(1))(0) - 1.0) < 1e-8);

  SUBCASE("second-order error decay") {
    auto f = [](const Vec& v) { return std::exp(v(0)); };
    Vec p = Vec::Constant(1, 0.4);
    const double e1 = std::abs(oracle::fd_gradient(f, p, 1e-2)(0) - std::exp(0.4));
    const double e2 = std::abs(oracle::fd_gradient(f, p, 1e-3)(0) - std::exp(0.4));
    CHECK(e1 / e2 == doctest::Approx(100.0).epsilon(0.01));
  }

  auto vf = [](const Vec& v) {
    Vec out(2);
    out << v(0) * v(1), std::sin(v(0));
    return out;
  };
  Mat J = oracle::fd_jacobian(vf, x);
  Mat J_ref(2, 2);
  J_ref << x(1), x(0), std::cos(x(0)), 0.0;
  CHECK(max_abs(J - J_ref) < 1e-8);
}

TEST_CASE("explicit Fisher NGD step") {
  SUBCASE("zero gradient") {
    Rng rng(5);
    Vec mu = random_vec(3, rng);
    Mat S = random_spd(3, rng);
    Vec mu0 = mu;
    Mat S0 = S;
    oracle::dense_fisher_ngd_step(mu, S, Vec::Zero(3), Mat::Zero(3, 3));
    CHECK(max_abs(mu - mu0) < 1e-14);
    CHECK(max_abs(S - S0) < 1e-14);
  }
  SUBCASE("scalar blocks") {
    Vec mu = Vec::Constant(1, 0.2);
    Mat S = Mat::Constant(1, 1, 0.7);
    oracle::dense_fisher_ngd_step(mu, S, Vec::Constant(1, 1.5), Mat::Constant(1, 1, -0.4), 1.0);
    CHECK(mu(0) == doctest::Approx(0.2 + 0.7 * 1.5));
    CHECK(S(0, 0) == doctest::Approx(0.7 + 0.49 * -0.4));
  }
  SUBCASE("size cap") {
    Vec mu = Vec::Zero(5);
    Mat S = Mat::Identity(5, 5);
    CHECK_THROWS_AS(oracle::dense_fisher_ngd_step(mu, S, mu, S), CapExceeded);
  }
}

TEST_CASE("Gaussian predictive NLPD and KL") {
  Vec mu = Vec::Zero(1);
  Mat S = Mat::Zero(1, 1);
  const double v = oracle::gaussian_predictive_nlpd(mu, S, Mat::Identity(1, 1), Vec::Zero(1),
                                                    Mat::Identity(1, 1), Vec::Zero(1));
  CHECK(v == doctest::Approx(0.5 * std::log(2 * M_PI)));

  Rng rng(6);
  Vec m1 = random_vec(3, rng);
  Mat S1 = random_spd(3, rng);
  CHECK(std::abs(oracle::gaussian_kl(m1, S1, m1, S1)) < 1e-12);
  CHECK(oracle::gaussian_kl(m1, S1, random_vec(3, rng), random_spd(3, rng)) > 0.0);
}
