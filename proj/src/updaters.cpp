#include "bong/updaters.hpp"

#include <chrono>

namespace bong {

Algorithm parse_algorithm(const std::string& name) {
  if (name == "bong") return Algorithm::BONG;
  if (name == "blr") return Algorithm::BLR;
  if (name == "bog") return Algorithm::BOG;
  if (name == "bbb") return Algorithm::BBB;
  throw InvalidConfig("unknown algorithm '" + name + "'");
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::BONG: return "bong";
    case Algorithm::BLR: return "blr";
    case Algorithm::BOG: return "bog";
    case Algorithm::BBB: return "bbb";
  }
  return "?";
}

void AlgorithmCfg::normalize() {
  if (algorithm == Algorithm::BONG) {
    lr = 1.0;
    iters = 1;
  } else if (algorithm == Algorithm::BOG) {
    iters = 1;
  }
  if (!(lr > 0)) throw InvalidConfig("learning rate must be positive");
  if (iters < 1) throw InvalidConfig("iters must be >= 1");
  if (family.structure == Structure::DLR) {
    family.param = Param::Natural;
    if (rank < 1) throw InvalidConfig("DLR rank must be >= 1");
  }
  bool mc = est.kind == EstimatorKind::MCHess || est.kind == EstimatorKind::MCEF;
  if (mc && est.M < 1) throw InvalidConfig("MC estimators need M >= 1");
}

Belief predict(const Belief& state, const DynamicsCfg& dyn) {
  if (dyn.kind == DynamicsCfg::Kind::Static) return state;
  if (!(dyn.gamma > 0 && dyn.gamma <= 1) || dyn.q < 0)
    throw InvalidConfig("random walk needs 0 < gamma <= 1 and q >= 0");
  const double g = dyn.gamma;
  if (auto* s = std::get_if<GaussFC>(&state)) {
    GaussFC out{g * s->mu, g * g * s->Sigma};
    out.Sigma.diagonal().array() += dyn.q;
    return out;
  }
  if (auto* s = std::get_if<GaussDiag>(&state)) {
    return GaussDiag{g * s->mu, (g * g * s->sigma2.array() + dyn.q).matrix()};
  }
  throw UnsupportedDynamics("random-walk predict is not defined for the DLR family");
}

namespace {

void check_family(const Belief& b, const FamilyTag& fam) {
  if (structure_of(b) != fam.structure)
    throw InvalidConfig("state structure does not match family " + fam.name());
}

Belief dispatch(Algorithm alg, const Belief& prior, const Belief& iterate, const GradEstimate& est,
                double lr, const FamilyTag& fam, const ValidationPolicy& pol) {
  check_family(prior, fam);
  check_family(iterate, fam);
  Belief out;
  switch (fam.structure) {
    case Structure::FC:
      out = detail::fc_step(alg, fam.param, std::get<GaussFC>(prior), std::get<GaussFC>(iterate),
                            est, lr);
      break;
    case Structure::Diag:
      out = detail::diag_step(alg, fam.param, std::get<GaussDiag>(prior),
                              std::get<GaussDiag>(iterate), est, lr);
      break;
    case Structure::DLR:
      out = detail::dlr_step(alg, std::get<GaussDLR>(prior), std::get<GaussDLR>(iterate), est, lr);
      break;
  }
  validate(out, pol);
  return out;
}

}  // namespace

Belief bong_step(const Belief& prior, const GradEstimate& est, const FamilyTag& fam,
                 const ValidationPolicy& pol) {
  return dispatch(Algorithm::BONG, prior, prior, est, 1.0, fam, pol);
}

Belief blr_step(const Belief& prior, const Belief& iterate, const GradEstimate& est, double lr,
                const FamilyTag& fam, const ValidationPolicy& pol) {
  return dispatch(Algorithm::BLR, prior, iterate, est, lr, fam, pol);
}

Belief bog_step(const Belief& prior, const GradEstimate& est, double lr, const FamilyTag& fam,
                const ValidationPolicy& pol) {
  return dispatch(Algorithm::BOG, prior, prior, est, lr, fam, pol);
}

Belief bbb_step(const Belief& prior, const Belief& iterate, const GradEstimate& est, double lr,
                const FamilyTag& fam, const ValidationPolicy& pol) {
  return dispatch(Algorithm::BBB, prior, iterate, est, lr, fam, pol);
}

Belief update(const Belief& state, const Vec& x, const Vec& y, const Problem& pb,
              const AlgorithmCfg& cfg, std::uint64_t seed, std::size_t step, UpdateStats* stats) {
  if (cfg.est.kind == EstimatorKind::MCHess && cfg.family.structure == Structure::DLR)
    throw EstimatorIncompatible("mc-hess cannot drive the DLR family");
  Belief it = state;
  for (Index i = 0; i < cfg.iters; ++i) {
    Rng rng(derive_seed(seed, step, std::uint64_t(i)));
    GradEstimate est = estimate(it, pb, x, y, cfg.est, rng);
    if (stats) ++stats->estimator_calls;
    it = dispatch(cfg.algorithm, state, it, est, cfg.lr, cfg.family, cfg.policy);
  }
  return it;
}

StreamResult run_stream(const Belief& init, const DynamicsCfg& dyn, const Mat& X, const Mat& Y,
                        const Problem& pb, const AlgorithmCfg& cfg, std::uint64_t seed,
                        const StreamOptions& opts) {
  if (X.cols() != Y.cols()) throw ShapeError("stream X/Y column mismatch");
  StreamResult res{init, {}};
  const std::size_t T = std::size_t(X.cols());
  res.steps.reserve(T);
  for (std::size_t t = 1; t <= T; ++t) {
    std::int64_t ns = 0;
    try {
      Belief pred = predict(res.state, dyn);
      auto t0 = std::chrono::steady_clock::now();
      res.state = update(pred, X.col(t - 1), Y.col(t - 1), pb, cfg, seed, t);
      auto t1 = std::chrono::steady_clock::now();
      ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
    } catch (const StepError&) {
      throw;
    } catch (const Error& e) {
      throw StepError(t, e);
    }
    res.steps.push_back({t, ns});
    if (opts.hook && (t == T || (opts.eval_every > 0 && t % opts.eval_every == 0)))
      opts.hook(t, res.state, ns);
  }
  return res;
}

}  // namespace bong
