#include "doctest.h"

#include <cmath>
#include <numbers>

#include "bong/obs_model.hpp"
#include "bong/oracles.hpp"
#include "test_util.hpp"

using namespace bong;
using namespace bong::testing;

TEST_CASE("mean map") {
  auto cat3 = ObsModel::categorical(3);
  Vec p = cat3.mean_map(Vec::Zero(3));
  CHECK(max_abs(p - Vec::Constant(3, 1.0 / 3.0)) < 1e-15);

  auto g = ObsModel::gaussian(1.0);
  CHECK(g.mean_map(Vec::Constant(1, 2.5))(0) == 2.5);

  auto cat2 = ObsModel::categorical(2);
  Vec big = cat2.mean_map((Vec(2) << 1000, 0).finished());
  CHECK(big.allFinite());
  CHECK(big(0) == 1.0);
  CHECK(big(1) == doctest::Approx(0.0).epsilon(1e-300));
  // the tail is exp(-1000), far below double precision of 1 - p0
  CHECK(big(1) < 1e-300);
}

TEST_CASE("conditional covariance") {
  auto cat2 = ObsModel::categorical(2);
  Mat V = cat2.cond_cov(Vec::Zero(2));
  CHECK(V(0, 0) == doctest::Approx(0.25));
  CHECK(V(0, 1) == doctest::Approx(-0.25));
  CHECK(V(1, 1) == doctest::Approx(0.25));

  auto g = ObsModel::gaussian(Mat(0.1 * Mat::Identity(2, 2)));
  Rng rng(1);
  CHECK(max_abs(g.cond_cov(random_vec(2, rng)) - 0.1 * Mat::Identity(2, 2)) == 0.0);

  auto cat5 = ObsModel::categorical(5);
  for (int rep = 0; rep < 50; ++rep) {
    Mat C = cat5.cond_cov(random_vec(5, rng, 3.0));
    CHECK(max_abs(C.rowwise().sum()) < 1e-15);
    Eigen::SelfAdjointEigenSolver<Mat> es(C);
    CHECK(es.eigenvalues().minCoeff() > -1e-15);
    CHECK(std::abs(es.eigenvalues()(0)) < 1e-12);  // rank <= C - 1
  }
}

TEST_CASE("log partition derivatives match finite differences") {
  Rng rng(2);
  auto cat = ObsModel::categorical(4);
  auto A = [&](const Vec& v) { return cat.log_partition(v); };
  auto h = [&](const Vec& v) { return cat.mean_map(v); };
  for (int rep = 0; rep < 20; ++rep) {
    Vec f = random_vec(4, rng);
    CHECK(max_abs(oracle::fd_gradient(A, f) - cat.mean_map(f)) < 1e-6);
    CHECK(max_abs(oracle::fd_jacobian(h, f) - cat.cond_cov(f)) < 1e-6);
  }
}

TEST_CASE("log-likelihood gradient matches finite differences") {
  Rng rng(3);
  auto cat = ObsModel::categorical(4);
  auto gau = ObsModel::gaussian(random_spd(3, rng));
  for (int rep = 0; rep < 20; ++rep) {
    for (const ObsModel* m : {&cat, &gau}) {
      Vec f = random_vec(m->dim(), rng);
      Vec y = m->is_classification() ? Vec(Vec::Unit(4, rep % 4)) : random_vec(3, rng);
      auto ll = [&](const Vec& v) { return m->loglik(y, v); };
      CHECK(max_abs(oracle::fd_gradient(ll, f) - m->loglik_grad_f(y, f)) < 1e-6);
    }
  }
}

TEST_CASE("log-likelihood and its gradient") {
  auto g = ObsModel::gaussian(1.0);
  Vec f = Vec::Constant(1, 0.3);
  CHECK(g.loglik(f, f) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)));
  CHECK(g.loglik_grad_f(f, f)(0) == 0.0);

  auto cat = ObsModel::categorical(3);
  Vec onehot = Vec::Unit(3, 0);
  Vec grad = cat.loglik_grad_f(onehot, (Vec(3) << 10, 0, 0).finished());
  CHECK(max_abs(grad) < 1e-4);

  Rng rng(3);
  auto gau = ObsModel::gaussian(random_spd(2, rng));
  for (int rep = 0; rep < 20; ++rep) {
    Vec fc = random_vec(3, rng);
    Vec yc = Vec::Unit(3, rep % 3);
    auto ll = [&](const Vec& v) { return cat.loglik(yc, v); };
    CHECK(max_abs(oracle::fd_gradient(ll, fc) - cat.loglik_grad_f(yc, fc)) < 1e-6);
    CHECK(max_abs(cat.loglik_grad_f(yc, fc) - (yc - cat.mean_map(fc))) == 0.0);

    Vec fg = random_vec(2, rng), yg = random_vec(2, rng);
    auto lg = [&](const Vec& v) { return gau.loglik(yg, v); };
    CHECK(max_abs(oracle::fd_gradient(lg, fg) - gau.loglik_grad_f(yg, fg)) < 1e-6);
  }
}

TEST_CASE("regularized inverse") {
  auto g = ObsModel::gaussian(Mat(0.25 * Mat::Identity(2, 2)));
  RinvFactor rf = regularized_Rinv(g, Vec::Zero(2));
  CHECK(max_abs(rf.Rinv - 4.0 * Mat::Identity(2, 2)) < 1e-14);
  CHECK(max_abs(rf.A.transpose() * rf.A - 4.0 * Mat::Identity(2, 2)) < 1e-14);

  auto cat2 = ObsModel::categorical(2);
  RinvFactor rc = regularized_Rinv(cat2, Vec::Zero(2), 1e-8);
  CHECK(rc.Rinv.allFinite());
  CHECK(rc.Rinv.norm() > 1e7);  // the null direction of V is heavily weighted
  CHECK(max_abs(rc.A.transpose() * rc.A - rc.Rinv) / rc.Rinv.norm() < 1e-10);

  CHECK_THROWS_AS(regularized_Rinv(cat2, Vec::Zero(2), 0.0), SingularObservationCov);

  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    auto m = ObsModel::gaussian(random_spd(3, rng));
    RinvFactor r = regularized_Rinv(m, Vec::Zero(3));
    CHECK((r.A.transpose() * r.A - r.Rinv).norm() < 1e-10);
    CHECK(max_abs(r.Rinv * m.R() - Mat::Identity(3, 3)) < 1e-10);
  }
  CHECK(cat2.default_jitter(Vec::Zero(2)) == doctest::Approx(1e-8 * 0.5 / 2));
  CHECK(g.default_jitter(Vec::Zero(2)) == 0.0);
}
