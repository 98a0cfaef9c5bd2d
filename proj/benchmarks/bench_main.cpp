#include <benchmark/benchmark.h>

#include <random>

#include "rulebench/learners.hpp"
#include "rulebench/preferences.hpp"
#include "rulebench/rulebook.hpp"
#include "rulebench/scenario_gen.hpp"

namespace {

using namespace rulebench;

void BM_RulebookCompare(benchmark::State& state) {
  const auto rb = default_rulebook();
  std::mt19937_64 rng(1);
  std::bernoulli_distribution on(0.3);
  std::vector<ViolationVector> vs(256);
  for (auto& v : vs) {
    for (auto& x : v.scores) x = on(rng) ? 1.0 : 0.0;
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rb.compare(vs[i % 256].view(), vs[(i * 7 + 3) % 256].view()));
    ++i;
  }
}
BENCHMARK(BM_RulebookCompare);

void BM_ViolationVector(benchmark::State& state) {
  const auto p = plant_violation({"r10", 0.5, "map_U", 1});
  for (auto _ : state) benchmark::DoNotOptimize(violation_vector(p.realization, p.scenario, p.map, {}));
}
BENCHMARK(BM_ViolationVector)->Unit(benchmark::kMillisecond);

void BM_BradleyTerry(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Annotation> ann;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (int k = 0; k < 10; ++k) {
        Annotation a;
        a.annotator_id = "u";
        a.realization_a = "i" + std::to_string(i);
        a.realization_b = "i" + std::to_string(j);
        a.choice = u(rng) < 0.6 ? Choice::a : Choice::b;
        ann.push_back(a);
      }
    }
  }
  const auto stats = pair_stats(ann);
  for (auto _ : state) benchmark::DoNotOptimize(fit_bradley_terry(stats));
}
BENCHMARK(BM_BradleyTerry)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_TrainForest(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 1);
  Samples s;
  s.dim = kRuleCount;
  std::array<double, kRuleCount> x{};
  for (int i = 0; i < 1000; ++i) {
    for (auto& v : x) v = g(rng);
    s.add(x, x[0] + 0.5 * x[3] > 0 ? 1 : -1);
  }
  for (auto _ : state) benchmark::DoNotOptimize(train_forest(s, 50, 4, 1));
}
BENCHMARK(BM_TrainForest)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
