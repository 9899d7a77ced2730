#include "doctest.h"

#include "bong/gaussian.hpp"
#include "bong/oracles.hpp"
#include "test_util.hpp"

using namespace bong;
using namespace bong::testing;

TEST_CASE("natural parameters of a unit FC Gaussian") {
  GaussFC s{Vec::Zero(1), Mat::Identity(1, 1)};
  NatFC n = to_natural(s);
  CHECK(n.psi1(0) == 0.0);
  CHECK(n.psi2(0, 0) == -0.5);
  GaussFC back = from_natural(n);
  CHECK(back.mu(0) == 0.0);
  CHECK(back.Sigma(0, 0) == 1.0);
}

TEST_CASE("diag natural parameters by hand") {
  GaussDiag s{Vec::LinSpaced(2, 1, 2), (Vec(2) << 1, 4).finished()};
  NatDiag n = to_natural(s);
  CHECK(n.psi1(0) == doctest::Approx(1.0));
  CHECK(n.psi1(1) == doctest::Approx(0.5));
  CHECK(n.psi2(0) == doctest::Approx(-0.5));
  CHECK(n.psi2(1) == doctest::Approx(-0.125));
  GaussDiag back = from_natural(n);
  CHECK(max_abs(back.mu - s.mu) < 1e-14);
  CHECK(max_abs(back.sigma2 - s.sigma2) < 1e-14);
}

TEST_CASE("FC roundtrip on random SPD covariances") {
  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    GaussFC s{random_vec(3, rng), random_spd(3, rng)};
    GaussFC back = from_natural(to_natural(s));
    CHECK(rel_err(back.Sigma, s.Sigma) < 1e-10);
    CHECK(rel_err(back.mu, s.mu) < 1e-10);
  }
}

TEST_CASE("singular covariance is reported") {
  GaussFC s{Vec::Zero(2), Mat::Zero(2, 2)};
  CHECK_THROWS_AS(to_natural(s), SingularCovariance);
  GaussDiag d{Vec::Zero(2), Vec::Zero(2)};
  CHECK_THROWS_AS(to_natural(d), SingularCovariance);
}

TEST_CASE("kl divergence") {
  Rng rng(3);
  SUBCASE("identical distributions") {
    GaussFC q{random_vec(4, rng), random_spd(4, rng)};
    CHECK(std::abs(kl_divergence(q, q)) < 1e-12);
  }
  SUBCASE("unit shift in 1-D") {
    GaussDiag a{Vec::Zero(1), Vec::Ones(1)}, b{Vec::Ones(1), Vec::Ones(1)};
    CHECK(kl_divergence(a, b) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("FC and Diag embeddings agree") {
    for (int rep = 0; rep < 20; ++rep) {
      GaussDiag a{random_vec(5, rng), random_positive(5, rng)};
      GaussDiag b{random_vec(5, rng), random_positive(5, rng)};
      GaussFC af{a.mu, a.sigma2.asDiagonal()}, bf{b.mu, b.sigma2.asDiagonal()};
      CHECK(std::abs(kl_divergence(a, b) - kl_divergence(af, bf)) < 1e-10);
    }
  }
  SUBCASE("matches dense oracle and is nonnegative") {
    for (int rep = 0; rep < 20; ++rep) {
      GaussFC a{random_vec(4, rng), random_spd(4, rng)}, b{random_vec(4, rng), random_spd(4, rng)};
      double kl = kl_divergence(a, b);
      CHECK(kl >= 0);
      CHECK(kl == doctest::Approx(oracle::gaussian_kl(a.mu, a.Sigma, b.mu, b.Sigma)).epsilon(1e-9));
    }
  }
  SUBCASE("DLR via dense expansion") {
    GaussDLR a{random_vec(6, rng), random_positive(6, rng), random_mat(6, 2, rng)};
    GaussDLR b{random_vec(6, rng), random_positive(6, rng), random_mat(6, 2, rng)};
    double ref = oracle::gaussian_kl(a.mu, dense_covariance(a), b.mu, dense_covariance(b));
    CHECK(kl_divergence(a, b) == doctest::Approx(ref).epsilon(1e-9));
  }
  SUBCASE("dimension mismatch") {
    GaussDiag a{Vec::Zero(2), Vec::Ones(2)}, b{Vec::Zero(3), Vec::Ones(3)};
    CHECK_THROWS_AS(kl_divergence(a, b), ShapeError);
  }
}

TEST_CASE("sampling is reproducible for a fixed seed") {
  GaussDiag s{Vec::Zero(5), Vec::Ones(5)};
  Rng r1(42), r2(42);
  Mat a = sample(s, 10, r1), b = sample(s, 10, r2);
  CHECK((a.array() == b.array()).all());
}

namespace {
Mat empirical_cov(const Mat& X) {
  Vec m = X.rowwise().mean();
  Mat C = X.colwise() - m;
  return C * C.transpose() / double(X.cols() - 1);
}
}  // namespace

TEST_CASE("fast DLR sampler covariance matches dense inverse") {
  Rng rng(11);
  GaussDLR s{random_vec(6, rng), random_positive(6, rng), random_mat(6, 2, rng)};
  Mat X = sample(s, 200000, rng);
  Mat ref = dense_covariance(s);
  CHECK((empirical_cov(X) - ref).norm() / ref.norm() < 0.02);
  CHECK((X.rowwise().mean() - s.mu).norm() < 0.02 * std::sqrt(ref.trace()));
}

TEST_CASE("FC and diag samplers match their covariances") {
  Rng rng(12);
  GaussFC f{random_vec(4, rng), random_spd(4, rng)};
  Mat X = sample(f, 200000, rng);
  CHECK((empirical_cov(X) - f.Sigma).norm() / f.Sigma.norm() < 0.02);
  GaussDiag d{random_vec(4, rng), random_positive(4, rng)};
  Mat Y = sample(d, 200000, rng);
  Mat D = d.sigma2.asDiagonal();
  CHECK((empirical_cov(Y) - D).norm() / D.norm() < 0.02);
}

TEST_CASE("DLR sampler coefficient is continuous at zero") {
  CHECK(dlr_sample_coeff(0.0) == 0.5);
  double prev = dlr_sample_coeff(1e-300);
  CHECK(prev == doctest::Approx(0.5));
  for (double l : {1e-16, 1e-12, 1e-8, 1e-4}) {
    double c = dlr_sample_coeff(l);
    CHECK(std::abs(c - (0.5 - 0.375 * l)) < 1e-6 * (1 + l));
  }
  // zero low-rank part: the map is the identity on the noise
  GaussDLR s{Vec::Zero(3), Vec::Ones(3), Mat::Zero(3, 1)};
  Mat eps = Mat::Identity(3, 3);
  CHECK(max_abs(sample_from_normals(s, eps) - eps) < 1e-15);
}

TEST_CASE("sampling an invalid FC state fails") {
  GaussFC s{Vec::Zero(2), -Mat::Identity(2, 2)};
  Rng rng(1);
  CHECK_THROWS_AS(sample(s, 3, rng), NotPositiveDefinite);
}

TEST_CASE("dlr_svd_project") {
  Rng rng(5);
  SUBCASE("lossless when K == R") {
    Vec ups = random_positive(7, rng);
    Mat Wt = random_mat(7, 3, rng);
    GaussDLR out = dlr_svd_project(ups, Wt, 3);
    Mat a = Mat(ups.asDiagonal()) + Wt * Wt.transpose();
    Mat b = Mat(out.ups.asDiagonal()) + out.W * out.W.transpose();
    CHECK(max_abs(a - b) < 1e-10);
  }
  SUBCASE("orthogonal columns of norms 3 and 1") {
    Mat Wt = Mat::Zero(2, 2);
    Wt(0, 0) = 3.0;
    Wt(1, 1) = 1.0;
    GaussDLR out = dlr_svd_project(Vec::Ones(2), Wt, 1);
    CHECK(std::abs(std::abs(out.W(0, 0)) - 3.0) < 1e-12);
    CHECK(std::abs(out.W(1, 0)) < 1e-12);
    CHECK(out.ups(0) == doctest::Approx(1.0));
    CHECK(out.ups(1) == doctest::Approx(2.0));
  }
  SUBCASE("diagonal preservation on random inputs") {
    for (int rep = 0; rep < 50; ++rep) {
      Vec ups = random_positive(8, rng);
      Mat Wt = random_mat(8, 5, rng);
      GaussDLR out = dlr_svd_project(ups, Wt, 2);
      Vec d0 = ups + Wt.rowwise().squaredNorm();
      Vec d1 = out.ups + out.W.rowwise().squaredNorm();
      CHECK(max_abs(d0 - d1) < 1e-10);
      CHECK(out.W.cols() == 2);
    }
  }
  SUBCASE("K < R is a shape error") {
    CHECK_THROWS_AS(dlr_svd_project(Vec::Ones(4), Mat::Ones(4, 1), 2), ShapeError);
  }
}

TEST_CASE("dlr_woodbury_solve") {
  Rng rng(9);
  SUBCASE("zero W is elementwise division") {
    Vec ups = random_positive(5, rng), v = random_vec(5, rng);
    CHECK(max_abs(dlr_woodbury_solve(ups, Mat::Zero(5, 2), v) - v.cwiseQuotient(ups)) < 1e-15);
  }
  SUBCASE("matches dense inverse") {
    for (int rep = 0; rep < 50; ++rep) {
      Vec ups = random_positive(5, rng), v = random_vec(5, rng);
      Mat W = random_mat(5, 2, rng);
      Mat prec = Mat(ups.asDiagonal()) + W * W.transpose();
      CHECK(max_abs(dlr_woodbury_solve(ups, W, v) - prec.inverse() * v) < 1e-9);
    }
  }
  SUBCASE("zero right-hand side") {
    Vec ups = random_positive(5, rng);
    CHECK(max_abs(dlr_woodbury_solve(ups, random_mat(5, 2, rng), Vec(Vec::Zero(5)))) == 0.0);
  }
  SUBCASE("singular inner system") {
    Vec ups = Vec::Constant(2, -1.0);
    Mat W = Mat::Zero(2, 1);
    W(0, 0) = 1.0;
    CHECK_THROWS_AS(dlr_woodbury_solve(ups, W, Vec(Vec::Ones(2))), SingularInnerSystem);
  }
}

TEST_CASE("validation policy") {
  GaussFC bad{Vec::Zero(2), Mat::Zero(2, 2)};
  bad.Sigma(0, 0) = 1.0;
  bad.Sigma(1, 1) = -1e-3;
  SUBCASE("default raises") {
    GaussFC s = bad;
    CHECK_THROWS_AS(validate(s), NotPositiveDefinite);
  }
  SUBCASE("clamp floors eigenvalues") {
    GaussFC s = bad;
    validate(s, {0.0, true});
    CHECK(s.Sigma(1, 1) == doctest::Approx(1e-12));
  }
  SUBCASE("jitter too small to repair still raises") {
    GaussFC s = bad;
    CHECK_THROWS_AS(validate(s, {1e-8, false}), NotPositiveDefinite);
  }
  SUBCASE("symmetrization") {
    GaussFC s{Vec::Zero(2), Mat::Identity(2, 2)};
    s.Sigma(0, 1) = 0.1;
    s.Sigma(1, 0) = 0.1 + 1e-14;
    validate(s);
    CHECK(s.Sigma(0, 1) == s.Sigma(1, 0));
  }
  SUBCASE("diag and DLR positivity") {
    GaussDiag d{Vec::Zero(2), (Vec(2) << 1, -1).finished()};
    CHECK_THROWS_AS(validate(d), NotPositiveDefinite);
    GaussDLR r{Vec::Zero(2), (Vec(2) << 1, 0).finished(), Mat::Zero(2, 1)};
    CHECK_THROWS_AS(validate(r), NotPositiveDefinite);
    GaussDiag n{Vec::Zero(1), Vec::Constant(1, std::nan(""))};
    CHECK_THROWS_AS(validate(n, {0.0, true}), NotPositiveDefinite);
  }
}

TEST_CASE("family names") {
  for (std::string n : {"fc", "fc_mom", "diag", "diag_mom", "dlr"})
    CHECK(FamilyTag::parse(n).name() == n);
  CHECK_THROWS_AS(FamilyTag::parse("kron"), InvalidConfig);
}
