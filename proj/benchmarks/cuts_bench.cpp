#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "cuts/grpo.hpp"
#include "cuts/harness.hpp"
#include "cuts/rollout.hpp"

namespace {

using namespace cuts;

CategoricalDist random_dist(std::size_t vocab, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::gamma_distribution<double> gamma(0.3, 1.0);
  std::vector<double> p(vocab);
  for (double& x : p) x = gamma(g) + 1e-12;
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= s;
  return CategoricalDist(p);
}

void BM_SampleStandard(benchmark::State& state) {
  const auto d = random_dist(static_cast<std::size_t>(state.range(0)), 1);
  RngStream rng(1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sample_standard(d, rng));
}
BENCHMARK(BM_SampleStandard)->Arg(16)->Arg(256)->Arg(4096);

void BM_SampleCuts(benchmark::State& state) {
  const auto d = random_dist(static_cast<std::size_t>(state.range(0)), 2);
  const CutsConfig cfg;
  RngStream rng(2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(sample_cuts(d, cfg, cfg.t_warm, rng));
}
BENCHMARK(BM_SampleCuts)->Arg(16)->Arg(256)->Arg(4096);

struct Setup {
  ExperimentConfig cfg;
  std::vector<PromptSpec> task;
  SoftmaxPolicy policy{16};

  Setup() {
    task = make_task(cfg.train_task());
    policy = initial_policy(cfg, task, {});
  }
};

void BM_RolloutGroup(benchmark::State& state) {
  const Setup s;
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rollout_group(s.policy, s.task[i % s.task.size()], s.cfg.cuts, 16, RngStream(3, i)));
    ++i;
  }
}
BENCHMARK(BM_RolloutGroup);

void BM_SurrogateAndGrad(benchmark::State& state) {
  const Setup s;
  const auto group = rollout_group(s.policy, s.task[0], s.cfg.cuts, 16, RngStream(4, 4));
  std::vector<double> r = group.rewards();
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<double>(i % 2);
  const auto adv = advantages(r, 1e-6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(surrogate_and_grad(group, s.policy, s.policy, adv, s.cfg.clip));
  }
}
BENCHMARK(BM_SurrogateAndGrad);

void BM_Decompose(benchmark::State& state) {
  std::vector<double> a(8), b(8);
  for (std::size_t i = 0; i < 8; ++i) {
    a[i] = static_cast<double>(i % 2);
    b[i] = static_cast<double>(i % 3 == 0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(decompose(a, b));
}
BENCHMARK(BM_Decompose);

void BM_PassAtK(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(pass_at_k(64, 9, 16));
}
BENCHMARK(BM_PassAtK);

}  // namespace
BENCHMARK_MAIN();
