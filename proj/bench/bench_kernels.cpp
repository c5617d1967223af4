// OpenMP kernels against their serial references.
//
//   ./heatreg_bench --benchmark_filter=softmin
//
// Set OMP_NUM_THREADS to control the parallel variants.

#include "heatreg/heat.hpp"
#include "heatreg/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

namespace {

using heatreg::kernels::Exec;
using heatreg::kernels::RowMatrix;

struct SoftminInput {
  RowMatrix cost;
  Eigen::VectorXd logw, g, out;

  explicit SoftminInput(int n) : cost(n, n), logw(n), g(n) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) cost(i, j) = u(rng);
      logw(i) = std::log(0.1 + u(rng));
      g(i) = u(rng) - 1.5;
    }
  }
};

void softmin(benchmark::State& state, Exec exec) {
  SoftminInput in(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    heatreg::kernels::softmin_rows(in.cost, in.logw, in.g, 1e-2, in.out, exec);
    benchmark::DoNotOptimize(in.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void curvature(benchmark::State& state, Exec exec) {
  const auto G = heatreg::cycle_generator(static_cast<int>(state.range(0)), 6.283185307179586);
  for (auto _ : state) {
    auto K = exec == Exec::serial ? heatreg::curvature_lower_bound_serial(G) : heatreg::curvature_lower_bound(G);
    benchmark::DoNotOptimize(K.K);
  }
}

BENCHMARK_CAPTURE(softmin, serial, Exec::serial)->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK_CAPTURE(softmin, parallel, Exec::parallel)->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK_CAPTURE(curvature, serial, Exec::serial)->Arg(64)->Arg(256);
BENCHMARK_CAPTURE(curvature, parallel, Exec::parallel)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
