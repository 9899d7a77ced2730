#include "bong/mlp.hpp"

#include <cmath>

#include "bong/kernels.hpp"

namespace bong {

namespace {

using CMap = Eigen::Map<const Mat>;

struct Tape {
  std::vector<Vec> a;  // a[0] = x, a[l] = activation after layer l
  std::vector<Vec> z;  // pre-activations, z[l-1] for layer l
};

Vec activate(const Vec& z, Activation act) {
  if (act == Activation::Tanh) return z.array().tanh();
  return z.cwiseMax(0.0);
}

Vec activate_deriv(const Vec& z, const Vec& a, Activation act) {
  if (act == Activation::Tanh) return 1.0 - a.array().square();
  return (z.array() > 0).cast<double>();
}

void check_shapes(const MlpSpec& spec, const Vec& theta, const Vec& x) {
  if (theta.size() != spec.num_params())
    throw ShapeError("theta has " + std::to_string(theta.size()) + " entries, expected " +
                     std::to_string(spec.num_params()));
  if (x.size() != spec.input_dim())
    throw ShapeError("x has " + std::to_string(x.size()) + " entries, expected " +
                     std::to_string(spec.input_dim()));
}

Tape run_forward(const MlpSpec& spec, const Vec& theta, const Vec& x) {
  check_shapes(spec, theta, x);
  const std::size_t L = spec.layers.size() - 1;
  Tape tp;
  tp.a.reserve(L + 1);
  tp.z.reserve(L);
  tp.a.push_back(x);
  Index off = 0;
  for (std::size_t l = 0; l < L; ++l) {
    const Index nin = spec.layers[l], nout = spec.layers[l + 1];
    CMap W(theta.data() + off, nout, nin);
    off += nin * nout;
    Vec z = W * tp.a.back();
    if (spec.use_bias) {
      z += theta.segment(off, nout);
      off += nout;
    }
    tp.a.push_back(l + 1 == L ? z : activate(z, spec.act));
    tp.z.push_back(std::move(z));
  }
  return tp;
}

Vec backward(const MlpSpec& spec, const Vec& theta, const Tape& tp, const Vec& cot) {
  const std::size_t L = spec.layers.size() - 1;
  Vec grad(theta.size());
  // layer offsets, walked in reverse
  std::vector<Index> offs(L + 1, 0);
  for (std::size_t l = 0; l < L; ++l)
    offs[l + 1] = offs[l] + spec.layers[l + 1] * (spec.layers[l] + (spec.use_bias ? 1 : 0));

  Vec delta = cot;
  for (std::size_t l = L; l-- > 0;) {
    const Index nin = spec.layers[l], nout = spec.layers[l + 1];
    const Index off = offs[l];
    Eigen::Map<Mat> gW(grad.data() + off, nout, nin);
    gW.noalias() = delta * tp.a[l].transpose();
    if (spec.use_bias) grad.segment(off + nin * nout, nout) = delta;
    if (l > 0) {
      CMap W(theta.data() + off, nout, nin);
      Vec back = W.transpose() * delta;
      delta = back.cwiseProduct(activate_deriv(tp.z[l - 1], tp.a[l], spec.act));
    }
  }
  return grad;
}

}  // namespace

Index MlpSpec::num_params() const {
  Index P = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l)
    P += (layers[l] + (use_bias ? 1 : 0)) * layers[l + 1];
  return P;
}

void MlpSpec::check() const {
  if (layers.size() < 2) throw ShapeError("an MLP needs at least input and output layers");
  for (Index n : layers)
    if (n < 1) throw ShapeError("layer sizes must be positive");
}

Vec init_params(const MlpSpec& spec, Rng& rng) {
  spec.check();
  Vec theta = Vec::Zero(spec.num_params());
  Index off = 0;
  for (std::size_t l = 0; l + 1 < spec.layers.size(); ++l) {
    const Index nin = spec.layers[l], nout = spec.layers[l + 1];
    std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(double(nin)));
    for (Index k = 0; k < nin * nout; ++k) theta(off + k) = nd(rng);
    off += nin * nout + (spec.use_bias ? nout : 0);
  }
  return theta;
}

Vec forward(const MlpSpec& spec, const Vec& theta, const Vec& x) {
  return run_forward(spec, theta, x).a.back();
}

Vec vjp(const MlpSpec& spec, const Vec& theta, const Vec& x, const Vec& cot) {
  Tape tp = run_forward(spec, theta, x);
  if (cot.size() != spec.output_dim()) throw ShapeError("vjp: cotangent size");
  return backward(spec, theta, tp, cot);
}

Mat jacobian_f(const MlpSpec& spec, const Vec& theta, const Vec& x) {
  Tape tp = run_forward(spec, theta, x);
  const Index C = spec.output_dim();
  Mat J(C, theta.size());
  for (Index c = 0; c < C; ++c) J.row(c) = backward(spec, theta, tp, Vec::Unit(C, c)).transpose();
  return J;
}

Mat jacobian_h(const MlpSpec& spec, const ObsModel& model, const Vec& theta, const Vec& x) {
  Tape tp = run_forward(spec, theta, x);
  const Index C = spec.output_dim();
  if (model.dim() != C) throw ShapeError("jacobian_h: model/net output mismatch");
  Mat V = model.cond_cov(tp.a.back());
  if (model.kind() == ObsModel::Kind::Gaussian) V = Mat::Identity(C, C);
  Mat J(C, theta.size());
  for (Index c = 0; c < C; ++c) J.row(c) = backward(spec, theta, tp, V.col(c)).transpose();
  return J;
}

Vec grad_loglik_theta(const MlpSpec& spec, const ObsModel& model, const Vec& theta, const Vec& x,
                      const Vec& y) {
  Tape tp = run_forward(spec, theta, x);
  if (model.dim() != spec.output_dim()) throw ShapeError("grad_loglik_theta: model/net mismatch");
  return backward(spec, theta, tp, model.loglik_grad_f(y, tp.a.back()));
}

Mat hessian_loglik_theta(const MlpSpec& spec, const ObsModel& model, const Vec& theta,
                         const Vec& x, const Vec& y, Index cap) {
  if (theta.size() > cap)
    throw CapExceeded("dense Hessian requested for P=" + std::to_string(theta.size()) +
                      " above cap " + std::to_string(cap));
  return fd_hessian_loglik(spec, model, theta, x, y, default_exec());
}

Vec hutchinson_diag_hessian(const MlpSpec& spec, const ObsModel& model, const Vec& theta,
                            const Vec& x, const Vec& y, Index N, Rng& rng) {
  if (N < 1) throw InvalidConfig("Hutchinson needs N >= 1");
  const Index P = theta.size();
  std::bernoulli_distribution coin(0.5);
  Mat Z(P, N);
  for (Index j = 0; j < N; ++j)
    for (Index i = 0; i < P; ++i) Z(i, j) = coin(rng) ? 1.0 : -1.0;
  Mat HZ = hessian_vector_products(spec, model, theta, x, y, Z, default_exec());
  Vec d = Vec::Zero(P);
  for (Index j = 0; j < N; ++j) d += Z.col(j).cwiseProduct(HZ.col(j));
  return d / double(N);
}

}  // namespace bong
