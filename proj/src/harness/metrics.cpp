#include "bong/metrics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace bong {

namespace {

struct PointEval {
  double nll;
  Index pred;  // argmax of the predictive class probabilities, -1 for regression
};

Index argmax(const Vec& v) {
  Index i;
  v.maxCoeff(&i);
  return i;
}

Index label_of(const Vec& y) { return argmax(y); }

// Symmetric square root with negative eigenvalues clamped to zero.
Mat psd_sqrt(const Mat& K) {
  Eigen::SelfAdjointEigenSolver<Mat> es(K);
  Vec d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal();
}

double gaussian_logpdf(const Vec& y, const Vec& m, const Mat& S) {
  Eigen::LLT<Mat> llt(S);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("predictive covariance");
  Vec r = y - m;
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (double(y.size()) * std::log(2 * std::numbers::pi) + logdet +
                 r.dot(llt.solve(r)));
}

// Averages softmax over logit draws given as columns, in the log domain.
void categorical_mixture(const Mat& logits, const Vec& y, PointEval& out) {
  const Index S = logits.cols();
  Vec logp_y(S);
  Mat probs(logits.rows(), S);
  for (Index s = 0; s < S; ++s) {
    const double lse = logsumexp(logits.col(s));
    logp_y(s) = logits(label_of(y), s) - lse;
    probs.col(s) = (logits.col(s).array() - lse).exp();
  }
  out.nll = -(logsumexp(logp_y) - std::log(double(S)));
  out.pred = argmax(probs.rowwise().sum());
}

std::vector<PointEval> eval_points(const Belief& state, const Problem& pb, const Dataset& test,
                                   PredMode mode, Index S, Rng& rng) {
  if (test.size() == 0) throw ShapeError("empty test set");
  if (S < 1 && mode != PredMode::Plugin) throw InvalidConfig("eval samples must be >= 1");
  const bool cls = pb.model.is_classification();
  const Vec& mu = mean_of(state);
  const Index n = test.size();
  const Index C = pb.spec.output_dim();

  Mat thetas, Z;
  if (mode == PredMode::MC) thetas = sample(state, S, rng);
  if (mode == PredMode::Linearized && cls) {
    Z.resize(C, S);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (Index s = 0; s < S; ++s)
      for (Index c = 0; c < C; ++c) Z(c, s) = nd(rng);
  }

  std::vector<PointEval> out(static_cast<std::size_t>(n));
  auto one = [&](Index i) -> double {
    const Vec x = test.X.col(i);
    const Vec y = test.Y.col(i);
    PointEval& pe = out[std::size_t(i)];
    pe.pred = -1;
    switch (mode) {
      case PredMode::Plugin: {
        Vec f = forward(pb.spec, mu, x);
        pe.nll = -pb.model.loglik(y, f);
        if (cls) pe.pred = argmax(f);
        break;
      }
      case PredMode::MC: {
        Mat logits(C, S);
        for (Index s = 0; s < S; ++s) logits.col(s) = forward(pb.spec, thetas.col(s), x);
        if (cls) {
          categorical_mixture(logits, y, pe);
        } else {
          Vec ll(S);
          for (Index s = 0; s < S; ++s) ll(s) = pb.model.loglik(y, logits.col(s));
          pe.nll = -(logsumexp(ll) - std::log(double(S)));
        }
        break;
      }
      case PredMode::Linearized: {
        Vec f = forward(pb.spec, mu, x);
        Mat F = jacobian_f(pb.spec, mu, x);
        Mat K = covariance_sandwich(state, F);
        K = (0.5 * (K + K.transpose())).eval();
        if (cls) {
          Mat logits = (psd_sqrt(K) * Z).colwise() + f;
          categorical_mixture(logits, y, pe);
        } else {
          pe.nll = -gaussian_logpdf(y, f, pb.model.R() + K);
        }
        break;
      }
    }
    return pe.nll;
  };
  map_scalars(n, one, default_exec());
  return out;
}

}  // namespace

Mat covariance_sandwich(const Belief& b, const Mat& J) {
  if (J.cols() != dim_of(b)) throw ShapeError("Jacobian width does not match the state");
  return std::visit(
      [&](const auto& s) -> Mat {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussFC>) {
          return J * s.Sigma * J.transpose();
        } else if constexpr (std::is_same_v<T, GaussDiag>) {
          return J * s.sigma2.asDiagonal() * J.transpose();
        } else {
          return J * dlr_woodbury_solve(s.ups, s.W, Mat(J.transpose()));
        }
      },
      b);
}

namespace {

double mean_nll(const std::vector<PointEval>& pts) {
  double acc = 0;
  for (const auto& p : pts) acc += p.nll;
  return acc / double(pts.size());
}

}  // namespace

double nlpd_plugin(const Belief& state, const Problem& pb, const Dataset& test) {
  Rng unused(0);
  return mean_nll(eval_points(state, pb, test, PredMode::Plugin, 1, unused));
}

double nlpd_mc(const Belief& state, const Problem& pb, const Dataset& test, Index S, Rng& rng) {
  return mean_nll(eval_points(state, pb, test, PredMode::MC, S, rng));
}

double nlpd_linearized(const Belief& state, const Problem& pb, const Dataset& test, Index S,
                       Rng& rng) {
  return mean_nll(eval_points(state, pb, test, PredMode::Linearized, S, rng));
}

ModeMetrics evaluate(const Belief& state, const Problem& pb, const Dataset& test, PredMode mode,
                     Index S, Rng& rng) {
  auto pts = eval_points(state, pb, test, mode, S, rng);
  ModeMetrics m{mean_nll(pts), std::numeric_limits<double>::quiet_NaN()};
  if (pb.model.is_classification()) {
    Index wrong = 0;
    for (Index i = 0; i < test.size(); ++i)
      if (pts[std::size_t(i)].pred != label_of(test.Y.col(i))) ++wrong;
    m.miscl = double(wrong) / double(test.size());
  }
  return m;
}

double misclassification(const Belief& state, const Problem& pb, const Dataset& test,
                         PredMode mode, Index S, Rng& rng) {
  if (!pb.model.is_classification() || test.task != TaskKind::Classification)
    throw TaskMismatch("misclassification needs a classification task");
  return evaluate(state, pb, test, mode, S, rng).miscl;
}

}  // namespace bong
