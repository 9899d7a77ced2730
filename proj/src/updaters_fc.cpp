#include "bong/updaters.hpp"

namespace bong::detail {

namespace {

Mat sym(const Mat& A) { return 0.5 * (A + A.transpose()); }

// Inverse of a symmetric matrix. Falls back to LU when it is not positive
// definite so that an invalid result reaches validation instead of failing here.
Mat sym_inverse(const Mat& A) {
  const Index P = A.rows();
  Eigen::LLT<Mat> llt(A);
  if (llt.info() == Eigen::Success) return sym(llt.solve(Mat::Identity(P, P)));
  return sym(A.partialPivLu().inverse());
}

GaussFC bong_fc(Param param, const GaussFC& prior, const GradEstimate& est) {
  const Mat& S = prior.Sigma;
  GaussFC out;
  if (est.is_low_rank()) {
    const Mat B = est.columns();
    const Mat SB = S * B;
    if (param == Param::Natural) {
      // (S^-1 + B B^T)^-1 = S - S B (I + B^T S B)^-1 B^T S
      Mat inner = B.transpose() * SB;
      inner.diagonal().array() += 1.0;
      Eigen::LLT<Mat> llt(inner);
      if (llt.info() != Eigen::Success)
        throw SingularInnerSystem("innovation system is not positive definite");
      out.Sigma = sym(S - SB * llt.solve(SB.transpose()));
      out.mu = prior.mu + out.Sigma * est.g;
    } else {
      out.Sigma = sym(S - SB * SB.transpose());
      out.mu = prior.mu + S * est.g;
    }
    return out;
  }
  const Mat G = est.dense();
  if (param == Param::Natural) {
    out.Sigma = sym_inverse(sym_inverse(S) - G);
    out.mu = prior.mu + out.Sigma * est.g;
  } else {
    out.Sigma = sym(S + S * G * S);
    out.mu = prior.mu + S * est.g;
  }
  return out;
}

}  // namespace

GaussFC fc_step(Algorithm alg, Param param, const GaussFC& prior, const GaussFC& it,
                const GradEstimate& est, double lr) {
  if (est.g.size() != prior.mu.size()) throw ShapeError("estimate/state dimension mismatch");
  if (alg == Algorithm::BONG) return bong_fc(param, prior, est);

  const bool with_kl = alg == Algorithm::BLR || alg == Algorithm::BBB;
  const bool natural_grad = alg == Algorithm::BLR;
  const GaussFC& cur = with_kl ? it : prior;
  const double a = lr;

  // Objective gradients with respect to (mu, Sigma) at the current iterate.
  Vec dmu = est.g;
  Mat dS = 0.5 * est.dense();
  Mat prec = sym_inverse(cur.Sigma);
  if (with_kl) {
    Mat prec0 = sym_inverse(prior.Sigma);
    dmu += prec0 * (prior.mu - cur.mu);
    dS -= 0.5 * (prec0 - prec);
  }

  GaussFC out;
  if (param == Param::Natural) {
    Mat new_prec;
    Vec psi1 = prec * cur.mu;
    if (natural_grad) {
      new_prec = prec - 2.0 * a * dS;
      psi1 += a * (dmu - 2.0 * dS * cur.mu);
    } else {
      const Vec Sdmu = cur.Sigma * dmu;
      Mat gpsi2 = 2.0 * Sdmu * cur.mu.transpose() + 2.0 * cur.Sigma * dS * cur.Sigma;
      new_prec = prec - 2.0 * a * sym(gpsi2);
      psi1 += a * Sdmu;
    }
    out.Sigma = sym_inverse(sym(new_prec));
    out.mu = out.Sigma * psi1;
  } else if (natural_grad) {
    out.mu = cur.mu + a * cur.Sigma * dmu;
    out.Sigma = sym(cur.Sigma + 2.0 * a * cur.Sigma * dS * cur.Sigma);
  } else {
    out.mu = cur.mu + a * dmu;
    out.Sigma = sym(cur.Sigma + a * dS);
  }
  return out;
}

GaussDiag diag_step(Algorithm alg, Param param, const GaussDiag& prior, const GaussDiag& it,
                    const GradEstimate& est, double lr) {
  if (est.g.size() != prior.mu.size()) throw ShapeError("estimate/state dimension mismatch");
  const Vec dG = est.diag();
  GaussDiag out;

  if (alg == Algorithm::BONG) {
    if (param == Param::Natural) {
      Vec prec = prior.sigma2.cwiseInverse() - dG;
      out.sigma2 = prec.cwiseInverse();
      out.mu = prior.mu + out.sigma2.cwiseProduct(est.g);
    } else {
      out.mu = prior.mu + prior.sigma2.cwiseProduct(est.g);
      out.sigma2 = prior.sigma2 + prior.sigma2.cwiseAbs2().cwiseProduct(dG);
    }
    return out;
  }

  const bool with_kl = alg == Algorithm::BLR || alg == Algorithm::BBB;
  const bool natural_grad = alg == Algorithm::BLR;
  const GaussDiag& cur = with_kl ? it : prior;
  const double a = lr;
  const Vec& s2 = cur.sigma2;
  const Vec prec = s2.cwiseInverse();

  Vec dmu = est.g;
  Vec dS = 0.5 * dG;
  if (with_kl) {
    Vec prec0 = prior.sigma2.cwiseInverse();
    dmu += prec0.cwiseProduct(prior.mu - cur.mu);
    dS -= 0.5 * (prec0 - prec);
  }

  if (param == Param::Natural) {
    Vec new_prec, psi1 = prec.cwiseProduct(cur.mu);
    if (natural_grad) {
      new_prec = prec - 2.0 * a * dS;
      psi1 += a * (dmu - 2.0 * dS.cwiseProduct(cur.mu));
    } else {
      Vec s2dmu = s2.cwiseProduct(dmu);
      Vec gpsi2 = 2.0 * s2dmu.cwiseProduct(cur.mu) + 2.0 * s2.cwiseAbs2().cwiseProduct(dS);
      new_prec = prec - 2.0 * a * gpsi2;
      psi1 += a * s2dmu;
    }
    out.sigma2 = new_prec.cwiseInverse();
    out.mu = out.sigma2.cwiseProduct(psi1);
  } else if (natural_grad) {
    out.mu = cur.mu + a * s2.cwiseProduct(dmu);
    out.sigma2 = s2 + 2.0 * a * s2.cwiseAbs2().cwiseProduct(dS);
  } else {
    out.mu = cur.mu + a * dmu;
    out.sigma2 = s2 + a * dS;
  }
  return out;
}

}  // namespace bong::detail
