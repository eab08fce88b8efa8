#include <benchmark/benchmark.h>

#include <vector>

#include "evemb/corpus_io.hpp"
#include "evemb/evaluation.hpp"
#include "evemb/training.hpp"

using namespace evemb;

namespace {

SyntheticData script_corpus(int types) {
  SynthConfig c;
  c.num_event_types = types;
  c.esds_per_scenario = 30;
  c.dropout = 0.2;
  c.lexical_variants = 2;
  c.seed = 1;
  return generate_synthetic(c);
}

Dims square(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  return {n, n, n};
}

}  // namespace

static void BM_ScoreEvent(benchmark::State& state) {
  const auto data = script_corpus(10);
  const auto seqs = data.corpus.sequences();
  const ModelParams p = init_params(square(state), 1, collect_vocabulary(seqs));
  const Event& ev = seqs.front().events.front();
  for (auto _ : state) benchmark::DoNotOptimize(score_event(ev, p, Mode::full));
}
BENCHMARK(BM_ScoreEvent)->Arg(10)->Arg(50)->Arg(100);

static void BM_SequenceGradients(benchmark::State& state) {
  const auto data = script_corpus(10);
  const auto seqs = data.corpus.sequences();
  Hyperparams h;
  h.dims = square(state);
  ModelParams p = init_params(h.dims, 1, collect_vocabulary(seqs));
  p.w.setConstant(0.01);  // nonzero so every block receives gradient
  for (auto _ : state) benchmark::DoNotOptimize(sequence_gradients(seqs.front(), p, h));
}
BENCHMARK(BM_SequenceGradients)->Arg(10)->Arg(50)->Arg(100);

static void BM_TrainEpoch(benchmark::State& state) {
  const auto data = script_corpus(static_cast<int>(state.range(0)));
  const auto seqs = data.corpus.sequences();
  Hyperparams h;
  h.epochs = 1;
  const ModelParams init = init_params(h.dims, 1, collect_vocabulary(seqs));
  for (auto _ : state) benchmark::DoNotOptimize(train(seqs, h, init));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(seqs.size()));
}
BENCHMARK(BM_TrainEpoch)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_EvaluatePairs(benchmark::State& state) {
  const auto data = script_corpus(10);
  const auto seqs = data.corpus.sequences();
  const ModelParams p = init_params(Dims{}, 1, collect_vocabulary(seqs));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(data.pairs, p, Mode::full));
}
BENCHMARK(BM_EvaluatePairs);
BENCHMARK_MAIN();
