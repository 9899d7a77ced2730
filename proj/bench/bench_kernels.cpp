#include <benchmark/benchmark.h>

#include "bong/kernels.hpp"

using namespace bong;

namespace {

struct Fixture {
  MlpSpec spec;
  ObsModel model = ObsModel::categorical(10);
  Vec theta, x, y;
  Mat thetas, xs, ys, Z;

  explicit Fixture(Index hidden) : spec{{20, hidden, 10}, Activation::Tanh, true} {
    Rng rng(1);
    theta = init_params(spec, rng);
    x = standard_normal(20, rng);
    y = Vec::Zero(10);
    y(3) = 1.0;
    thetas = theta.replicate(1, 64) + 0.1 * Mat::NullaryExpr(theta.size(), 64, [&](Index, Index) {
               return std::normal_distribution<double>(0.0, 1.0)(rng);
             });
    xs = Mat::NullaryExpr(20, 512, [&](Index, Index) {
      return std::normal_distribution<double>(0.0, 1.0)(rng);
    });
    ys = Mat::Zero(10, 512);
    for (Index i = 0; i < 512; ++i) ys(i % 10, i) = 1.0;
    Z = Mat::NullaryExpr(theta.size(), 32, [&](Index, Index) {
      return std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
    });
  }
};

Exec exec_of(const benchmark::State& st) { return st.range(1) ? Exec::Parallel : Exec::Serial; }

void BM_SampleGradients(benchmark::State& st) {
  Fixture f(st.range(0));
  for (auto _ : st)
    benchmark::DoNotOptimize(sample_gradients(f.spec, f.model, f.thetas, f.x, f.y, exec_of(st)));
}

void BM_FdHessian(benchmark::State& st) {
  Fixture f(st.range(0));
  for (auto _ : st)
    benchmark::DoNotOptimize(fd_hessian_loglik(f.spec, f.model, f.theta, f.x, f.y, exec_of(st)));
}

void BM_HessianVectorProducts(benchmark::State& st) {
  Fixture f(st.range(0));
  for (auto _ : st)
    benchmark::DoNotOptimize(
        hessian_vector_products(f.spec, f.model, f.theta, f.x, f.y, f.Z, exec_of(st)));
}

void BM_ExampleLogliks(benchmark::State& st) {
  Fixture f(st.range(0));
  for (auto _ : st)
    benchmark::DoNotOptimize(example_logliks(f.spec, f.model, f.theta, f.xs, f.ys, exec_of(st)));
}

// Args: hidden width, 0 = serial / 1 = parallel.
BENCHMARK(BM_SampleGradients)->ArgsProduct({{8, 32}, {0, 1}});
BENCHMARK(BM_FdHessian)->ArgsProduct({{2, 8}, {0, 1}});
BENCHMARK(BM_HessianVectorProducts)->ArgsProduct({{8, 32}, {0, 1}});
BENCHMARK(BM_ExampleLogliks)->ArgsProduct({{8, 32}, {0, 1}});

}  // namespace

BENCHMARK_MAIN();
