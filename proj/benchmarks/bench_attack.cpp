#include <benchmark/benchmark.h>

#include <random>

#include "spac/attack.hpp"
#include "spac/datasets.hpp"

namespace {

void BM_ProjectFeasible(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> val(-0.5, 1.0);
  spac::Matrix d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) d(i, j) = d(j, i) = val(rng);
  }
  d.diagonal().setZero();
  for (auto _ : state) benchmark::DoNotOptimize(spac::project_feasible(d, 0.01 * n * n));
}
BENCHMARK(BM_ProjectFeasible)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_AttackExactVsApprox(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const bool approx = state.range(1) != 0;
  spac::SbmParams p;
  p.sizes = {n / 2, n - n / 2};
  p.p_in = 12.0 / n;
  p.p_out = 1.5 / n;
  const auto g = spac::generate_synthetic(p, 2).graph;
  spac::AttackConfig cfg;
  cfg.budget_ratio = 0.05;
  cfg.steps = 10;
  cfg.sample_trials = 5;
  spac::ApproxParams params;
  params.k1 = n / 8;
  params.k2 = n / 16;
  if (approx) cfg.approx = params;
  for (auto _ : state) {
    auto objective = approx ? spac::SpectralObjective::selective_approx(g, params)
                            : spac::SpectralObjective::exact(g);
    benchmark::DoNotOptimize(spac::pgd_spectral_attack(g, cfg, std::move(objective)));
  }
}
BENCHMARK(BM_AttackExactVsApprox)
    ->ArgsProduct({{512, 1024}, {0, 1}})
    ->Unit(benchmark::kMillisecond)
    ->Iterations(1);

}  // namespace
