#include <benchmark/benchmark.h>

#include "spac/datasets.hpp"
#include "spac/spectral.hpp"

namespace {

spac::Matrix laplacian_of_sbm(int n) {
  spac::SbmParams p;
  p.sizes = {n / 2, n - n / 2};
  p.p_in = 8.0 / n;
  p.p_out = 1.0 / n;
  return spac::normalized_laplacian(spac::generate_synthetic(p, 1).graph);
}

void BM_EigFull(benchmark::State& state) {
  const auto l = laplacian_of_sbm(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(spac::eig_full(l));
}
BENCHMARK(BM_EigFull)->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_EigenvaluesFull(benchmark::State& state) {
  const auto l = laplacian_of_sbm(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(spac::eigenvalues_full(l));
}
BENCHMARK(BM_EigenvaluesFull)->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_EigSelective(benchmark::State& state) {
  const auto l = laplacian_of_sbm(static_cast<int>(state.range(0)));
  spac::SelectiveOptions opts;
  opts.solver = static_cast<spac::SelectiveSolver>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(spac::eig_selective(l, 32, 16, opts));
}
BENCHMARK(BM_EigSelective)
    ->ArgsProduct({{512, 1024},
                   {static_cast<int>(spac::SelectiveSolver::kDense),
                    static_cast<int>(spac::SelectiveSolver::kRange),
                    static_cast<int>(spac::SelectiveSolver::kLanczos)}})
    ->Unit(benchmark::kMillisecond);

void BM_GradSpectralDistance(benchmark::State& state) {
  spac::SbmParams p;
  const int n = static_cast<int>(state.range(0));
  p.sizes = {n / 2, n - n / 2};
  p.p_in = 8.0 / n;
  p.p_out = 1.0 / n;
  const auto g = spac::generate_synthetic(p, 1).graph;
  const spac::Matrix delta = spac::Matrix::Zero(n, n);
  spac::Matrix a = g.adjacency();
  a(0, n - 1) = a(n - 1, 0) = 0.5;
  const auto basis = spac::eig_full(spac::normalized_laplacian(a));
  const auto reference = spac::eigenvalues_full(spac::normalized_laplacian(g));
  const auto legal = spac::legal_ops(g);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spac::grad_spectral_distance(legal, a, reference, basis,
                                                          spac::DegeneracyPolicy::kAverageCluster));
  }
}
BENCHMARK(BM_GradSpectralDistance)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace
