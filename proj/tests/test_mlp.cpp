#include "doctest.h"

#include "bong/kernels.hpp"
#include "bong/mlp.hpp"
#include "bong/oracles.hpp"
#include "test_util.hpp"

using namespace bong;
using namespace bong::testing;

namespace {

MlpSpec small_net(Activation act = Activation::Tanh) { return {{3, 5, 4, 2}, act, true}; }

double rel(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(1e-3, b.norm()); }

}  // namespace

TEST_CASE("parameter count and layout") {
  CHECK(small_net().num_params() == (3 + 1) * 5 + (5 + 1) * 4 + (4 + 1) * 2);
  MlpSpec nb{{3, 2}, Activation::Tanh, false};
  CHECK(nb.num_params() == 6);
  CHECK_THROWS_AS(MlpSpec{{3}}.check(), ShapeError);
}

TEST_CASE("forward") {
  MlpSpec spec = small_net();
  Vec x = Vec::LinSpaced(3, -1, 1);
  CHECK(max_abs(forward(spec, Vec::Zero(spec.num_params()), x)) == 0.0);

  MlpSpec lin{{3, 2}};
  Rng rng(1);
  Vec th = random_vec(lin.num_params(), rng);
  Mat W = Eigen::Map<Mat>(th.data(), 2, 3);
  Vec b = th.tail(2);
  CHECK(max_abs(forward(lin, th, x) - (W * x + b)) < 1e-15);

  Rng r1(5), r2(5);
  Vec t1 = init_params(spec, r1), t2 = init_params(spec, r2);
  Vec f1 = forward(spec, t1, x), f2 = forward(spec, t2, x);
  CHECK((f1.array() == f2.array()).all());

  CHECK_THROWS_AS(forward(spec, Vec::Zero(3), x), ShapeError);
  CHECK_THROWS_AS(forward(spec, t1, Vec::Zero(4)), ShapeError);
}

TEST_CASE("gradient, Jacobians against finite differences") {
  Rng rng(2);
  auto gau = ObsModel::gaussian(Mat(0.5 * Mat::Identity(2, 2)));
  auto cat = ObsModel::categorical(2);
  for (Activation act : {Activation::Tanh, Activation::Relu}) {
    MlpSpec spec = small_net(act);
    for (int rep = 0; rep < 10; ++rep) {
      Vec th = init_params(spec, rng) + random_vec(spec.num_params(), rng, 0.1);
      Vec x = random_vec(3, rng);
      Vec y = random_vec(2, rng);
      Vec yc = Vec::Unit(2, rep % 2);
      for (auto [m, yy] : {std::pair{&gau, y}, std::pair{&cat, yc}}) {
        auto ll = [&](const Vec& t) { return m->loglik(yy, forward(spec, t, x)); };
        CHECK(rel(grad_loglik_theta(spec, *m, th, x, yy), oracle::fd_gradient(ll, th)) < 1e-5);
        auto h = [&](const Vec& t) { return m->mean_map(forward(spec, t, x)); };
        CHECK(rel(jacobian_h(spec, *m, th, x), oracle::fd_jacobian(h, th)) < 1e-5);
      }
    }
  }
}

TEST_CASE("residual-free and linear identities") {
  Rng rng(3);
  MlpSpec spec = small_net();
  auto gau = ObsModel::gaussian(Mat(0.3 * Mat::Identity(2, 2)));
  Vec th = init_params(spec, rng), x = random_vec(3, rng);
  CHECK(max_abs(grad_loglik_theta(spec, gau, th, x, forward(spec, th, x))) == 0.0);

  // linear net: grad = X^T R^-1 (y - f), H = X, Hessian = -X^T R^-1 X
  MlpSpec lin{{3, 2}};
  Vec tl = random_vec(lin.num_params(), rng), y = random_vec(2, rng);
  Mat X(2, lin.num_params());
  X.setZero();
  for (Index c = 0; c < 2; ++c) {
    for (Index j = 0; j < 3; ++j) X(c, j * 2 + c) = x(j);
    X(c, 6 + c) = 1.0;
  }
  Mat Rinv = gau.R().inverse();
  CHECK(max_abs(grad_loglik_theta(lin, gau, tl, x, y) - X.transpose() * Rinv * (y - X * tl)) <
        1e-12);
  CHECK(max_abs(jacobian_h(lin, gau, tl, x) - X) < 1e-15);
  CHECK(max_abs(hessian_loglik_theta(lin, gau, tl, x, y) + X.transpose() * Rinv * X) < 1e-4);
}

TEST_CASE("categorical chain identity") {
  Rng rng(4);
  MlpSpec spec{{3, 4, 3}};
  auto cat = ObsModel::categorical(3);
  for (int rep = 0; rep < 20; ++rep) {
    Vec th = init_params(spec, rng), x = random_vec(3, rng);
    Mat V = cat.cond_cov(forward(spec, th, x));
    CHECK(max_abs(jacobian_h(spec, cat, th, x) - V * jacobian_f(spec, th, x)) < 1e-8);
  }
}

TEST_CASE("dense Hessian") {
  Rng rng(5);
  MlpSpec spec = small_net();
  auto gau = ObsModel::gaussian(Mat(Mat::Identity(2, 2)));
  Vec th = init_params(spec, rng), x = random_vec(3, rng), y = random_vec(2, rng);
  Mat H = hessian_loglik_theta(spec, gau, th, x, y);
  CHECK(max_abs(H - H.transpose()) < 1e-6);
  auto ll = [&](const Vec& t) { return gau.loglik(y, forward(spec, t, x)); };
  CHECK(rel(H, oracle::fd_hessian(ll, th)) < 1e-3);

  // scalar quadratic: f = theta * x, loglik = -(y - theta x)^2 / 2, second derivative -x^2
  MlpSpec one{{1, 1}, Activation::Tanh, false};
  Vec x1 = Vec::Constant(1, 1.7);
  Mat h1 = hessian_loglik_theta(one, gau.dim() == 1 ? gau : ObsModel::gaussian(1.0),
                                Vec::Constant(1, 0.4), x1, Vec::Constant(1, 2.0));
  CHECK(h1(0, 0) == doctest::Approx(-1.7 * 1.7).epsilon(1e-4));

  CHECK_THROWS_AS(hessian_loglik_theta(spec, gau, th, x, y, 10), CapExceeded);
}

TEST_CASE("Hutchinson diagonal") {
  Rng rng(6);
  // separable quadratic: no hidden layer, no bias, single output per weight is not
  // separable in general, so use a 1-input net with P = 1 and a 3-output Gaussian
  MlpSpec sep{{1, 3}, Activation::Tanh, false};
  Mat R = Vec((Vec(3) << 0.5, 1.0, 2.0).finished()).asDiagonal();
  auto gau = ObsModel::gaussian(R);
  Vec x = Vec::Constant(1, 1.3), th = random_vec(3, rng), y = random_vec(3, rng);
  Vec exact = -(x(0) * x(0)) * R.diagonal().cwiseInverse();
  Vec est = hutchinson_diag_hessian(sep, gau, th, x, y, 2000, rng);
  CHECK(max_abs((est - exact).cwiseQuotient(exact)) < 0.05);

  MlpSpec spec{{2, 3, 1}};
  auto g1 = ObsModel::gaussian(1.0);
  Vec t2 = init_params(spec, rng), x2 = random_vec(2, rng), y2 = random_vec(1, rng);
  Vec dense = hessian_loglik_theta(spec, g1, t2, x2, y2).diagonal();
  Vec h2 = hutchinson_diag_hessian(spec, g1, t2, x2, y2, 20000, rng);
  CHECK((h2 - dense).norm() / dense.norm() < 0.05);

  MlpSpec scalar{{1, 1}, Activation::Tanh, false};
  Vec h = hutchinson_diag_hessian(scalar, g1, Vec::Constant(1, 0.2), Vec::Constant(1, 2.0),
                                  Vec::Constant(1, 1.0), 1, rng);
  CHECK(h(0) == doctest::Approx(-4.0).epsilon(1e-6));
}

TEST_CASE("serial and parallel kernels agree bitwise") {
  Rng rng(7);
  MlpSpec spec = small_net();
  auto cat = ObsModel::categorical(2);
  Vec th = init_params(spec, rng), x = random_vec(3, rng), y = Vec::Unit(2, 1);
  Mat thetas = random_mat(spec.num_params(), 16, rng);
  Mat a = sample_gradients(spec, cat, thetas, x, y, Exec::Serial);
  Mat b = sample_gradients(spec, cat, thetas, x, y, Exec::Parallel);
  CHECK((a.array() == b.array()).all());
  Mat ha = fd_hessian_loglik(spec, cat, th, x, y, Exec::Serial);
  Mat hb = fd_hessian_loglik(spec, cat, th, x, y, Exec::Parallel);
  CHECK((ha.array() == hb.array()).all());
  Mat xs = random_mat(3, 40, rng), ys = Mat::Zero(2, 40);
  ys.row(0).setOnes();
  Vec la = example_logliks(spec, cat, th, xs, ys, Exec::Serial);
  Vec lb = example_logliks(spec, cat, th, xs, ys, Exec::Parallel);
  CHECK((la.array() == lb.array()).all());
}
