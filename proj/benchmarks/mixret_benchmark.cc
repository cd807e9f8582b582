// benchmarks/mixret_benchmark.cc

// Copyright 2026  The mixret authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "mixret/encoder.h"
#include "mixret/scoring.h"
#include "mixret/synth.h"

namespace {

using namespace mixret;

Waveform bench_clip(uint64_t seed, SynthKind kind, double duration_s) {
  SynthSpec spec;
  spec.class_id = "bench";
  spec.kind = kind;
  spec.seed = seed;
  spec.duration_s = duration_s;
  return synthesize(spec);
}

void BM_Synthesize10s(benchmark::State& state) {
  SynthSpec spec;
  spec.class_id = "bench";
  spec.seed = 0;
  spec.duration_s = 10.0;
  for (auto _ : state) {
    spec.seed++;
    benchmark::DoNotOptimize(synthesize(spec));
  }
}
BENCHMARK(BM_Synthesize10s);

void BM_MixAtSnr(benchmark::State& state) {
  Waveform x1 = bench_clip(1, SynthKind::kMachine, 10.0);
  Waveform x2 = bench_clip(2, SynthKind::kNoiseStationary, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(mix_at_snr_unitnoise(x1, x2, 3.0));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MixAtSnr);

void BM_ExtractLogmel(benchmark::State& state) {
  Waveform w = bench_clip(3, SynthKind::kMachine, static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(extract_logmel(w));
}
BENCHMARK(BM_ExtractLogmel)->Arg(2)->Arg(10);

void BM_EncoderForward(benchmark::State& state) {
  EncoderConfig cfg;
  cfg.d_model = static_cast<int>(state.range(0));
  cfg.n_layers = 6;
  cfg.n_classes = 28;
  Parameters params = init_parameters(cfg);
  MelFeatures f = extract_logmel(bench_clip(4, SynthKind::kMachine, 10.0));
  for (auto _ : state) benchmark::DoNotOptimize(forward_with_head(params, f));
}
BENCHMARK(BM_EncoderForward)->Arg(32)->Arg(64);

void BM_EncoderBackward(benchmark::State& state) {
  EncoderConfig cfg;
  cfg.d_model = 32;
  cfg.n_layers = 4;
  cfg.n_classes = 28;
  Parameters params = init_parameters(cfg);
  MelFeatures f = extract_logmel(bench_clip(5, SynthKind::kMachine, 2.0));
  ForwardCache cache = forward_cached(params, f);
  std::vector<double> grad_logits(cfg.n_classes, 0.1);
  for (auto _ : state)
    benchmark::DoNotOptimize(backward_with_head(params, cache, Matrix(), grad_logits));
}
BENCHMARK(BM_EncoderBackward);

void BM_KnnScore(benchmark::State& state) {
  const int dim = 256;
  Rng rng(6);
  ReferenceStore store("bench", 1);
  for (int i = 0; i < state.range(0); ++i) {
    PooledEmbedding e;
    e.source_layer = 1;
    e.values.resize(dim);
    for (double& v : e.values) v = rng.gaussian();
    store.add(e, Domain::kSource);
  }
  PooledEmbedding probe;
  probe.source_layer = 1;
  probe.values.resize(dim);
  for (double& v : probe.values) v = rng.gaussian();
  for (auto _ : state) benchmark::DoNotOptimize(knn_score(probe, store, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KnnScore)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
