#include "bong/kernels.hpp"

#include <atomic>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bong {

namespace {
std::atomic<Exec> g_exec{Exec::Parallel};
}

Exec default_exec() { return g_exec.load(); }
void set_default_exec(Exec e) { g_exec.store(e); }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Mat sample_gradients(const MlpSpec& spec, const ObsModel& model, const Mat& thetas, const Vec& x,
                     const Vec& y, Exec exec) {
  return map_columns(
      thetas.rows(), thetas.cols(),
      [&](Index m) { return grad_loglik_theta(spec, model, thetas.col(m), x, y); }, exec);
}

Mat fd_hessian_loglik(const MlpSpec& spec, const ObsModel& model, const Vec& theta, const Vec& x,
                      const Vec& y, Exec exec) {
  const Index P = theta.size();
  Mat H = map_columns(
      P, P,
      [&](Index i) {
        const double h = 1e-5 * (1.0 + std::abs(theta(i)));
        Vec tp = theta, tm = theta;
        tp(i) += h;
        tm(i) -= h;
        // use the actually representable step
        const double span = tp(i) - tm(i);
        return Vec((grad_loglik_theta(spec, model, tp, x, y) -
                    grad_loglik_theta(spec, model, tm, x, y)) /
                   span);
      },
      exec);
  return 0.5 * (H + H.transpose());
}

Mat hessian_vector_products(const MlpSpec& spec, const ObsModel& model, const Vec& theta,
                            const Vec& x, const Vec& y, const Mat& Z, Exec exec) {
  const double eps = 1e-5 * (1.0 + theta.cwiseAbs().maxCoeff());
  const Vec g0 = grad_loglik_theta(spec, model, theta, x, y);
  return map_columns(
      theta.size(), Z.cols(),
      [&](Index j) {
        return Vec((grad_loglik_theta(spec, model, theta + eps * Z.col(j), x, y) - g0) / eps);
      },
      exec);
}

Vec example_logliks(const MlpSpec& spec, const ObsModel& model, const Vec& theta, const Mat& xs,
                    const Mat& ys, Exec exec) {
  return map_scalars(
      xs.cols(), [&](Index i) { return model.loglik(ys.col(i), forward(spec, theta, xs.col(i))); },
      exec);
}

}  // namespace bong
