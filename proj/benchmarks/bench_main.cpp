#include <benchmark/benchmark.h>

#include "catwalk/anonymizer.hpp"
#include "catwalk/layers.hpp"
#include "catwalk/model.hpp"
#include "catwalk/sampler.hpp"
#include "catwalk/synthetic.hpp"

using namespace catwalk;

namespace {

SamplerConfig bench_sampler(const TemporalHypergraph& g) {
  SamplerConfig c;
  c.walks_per_node = 8;
  c.walk_length = 3;
  c.alpha = 10.0 / (g.max_time() - g.min_time());
  return c;
}

void BM_ScoreTable(benchmark::State& state) {
  const auto g = synthetic_stream(static_cast<std::size_t>(state.range(0)), 1);
  const auto c = bench_sampler(g);
  for (auto _ : state) benchmark::DoNotOptimize(ScoreTable::compute(g, c));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ScoreTable)->RangeMultiplier(2)->Range(2500, 20000)->Complexity();

// Walk sets for every event of the stream.
void BM_SampleAllWalksets(benchmark::State& state) {
  const auto g = synthetic_stream(static_cast<std::size_t>(state.range(0)), 1);
  const auto c = bench_sampler(g);
  const auto scores = ScoreTable::compute(g, c);
  const SetWalkSampler sampler(g, scores, c);
  for (auto _ : state) {
    std::size_t n = 0;
    for (EventId e = 0; e < g.event_count(); ++e) {
      n += sampler.sample_walksets(g.nodes(e), g.time(e), e).size();
    }
    benchmark::DoNotOptimize(n);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SampleAllWalksets)->RangeMultiplier(2)->Range(2500, 20000)->Complexity();

void BM_SetMixer(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  Rng rng(0);
  ParameterSet ps;
  const auto layer = SetMixerLayer::create(ps, "mix", dim, dim, dim, rng);
  Matrix x(rows, dim);
  for (double& v : x.data) v = rng.uniform(-1.0, 1.0);
  for (auto _ : state) {
    Tape t(ps);
    benchmark::DoNotOptimize(t.value(layer.forward(t, t.constant(x), {})).data[0]);
  }
}
BENCHMARK(BM_SetMixer)->Args({4, 16})->Args({16, 64})->Args({64, 64});

void BM_HyperedgeScore(benchmark::State& state) {
  const auto g = synthetic_stream(2000, 1);
  const auto c = bench_sampler(g);
  const auto scores = ScoreTable::compute(g, c);
  const SetWalkSampler sampler(g, scores, c);
  ModelConfig mc;
  mc.k_max = mc.d_max = g.max_edge_size();
  mc.hidden = static_cast<std::size_t>(state.range(0));
  mc.head_hidden = mc.hidden;
  const CatWalkModel model(mc);
  const EventId e = 1999;
  const auto sets = sampler.sample_walksets(g.nodes(e), g.time(e), e);
  for (auto _ : state) benchmark::DoNotOptimize(model.score(sets, g.time(e)));
}
BENCHMARK(BM_HyperedgeScore)->Arg(16)->Arg(64);

}  // namespace
BENCHMARK_MAIN();
