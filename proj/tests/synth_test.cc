// tests/synth_test.cc

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

#include "doctest.h"
#include "mixret/corpus.h"
#include "mixret/synth.h"
#include "oracles.h"

using namespace mixret;

namespace {

SynthSpec machine_spec(uint64_t seed, double duration = 10.0) {
  SynthSpec s;
  s.class_id = "m0";
  s.kind = SynthKind::kMachine;
  s.seed = seed;
  s.duration_s = duration;
  return s;
}

SynthSpec noise_spec(SynthKind kind, uint64_t seed, double duration = 10.0) {
  SynthSpec s;
  s.class_id = "n0";
  s.kind = kind;
  s.seed = seed;
  s.duration_s = duration;
  return s;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("pure function of the spec") {
  SynthSpec spec = machine_spec(42);
  Waveform a = synthesize(spec);
  Waveform b = synthesize(spec);
  CHECK(a.samples == b.samples);  // bit-identical

  SynthSpec other = spec;
  other.seed = 43;
  CHECK(synthesize(other).samples != a.samples);
}

TEST_CASE("length arithmetic") {
  CHECK(synthesize(machine_spec(1, 10.0)).samples.size() == 160000);
  CHECK(synthesize(machine_spec(1, 2.5)).samples.size() == 40000);
  CHECK(synthesize(noise_spec(SynthKind::kNoiseStationary, 1, 1.0)).samples.size() == 16000);
}

TEST_CASE("stationarity contract, many seeds") {
  for (uint64_t seed = 0; seed < 12; ++seed) {
    Waveform stat = synthesize(noise_spec(SynthKind::kNoiseStationary, seed));
    Waveform burst = synthesize(noise_spec(SynthKind::kNoiseNonstationary, seed));
    CHECK(testing::per_second_power_variation_db(stat) < 3.0);
    CHECK(testing::per_second_power_variation_db(burst) >= 6.0);
  }
}

TEST_CASE("anomalous variants differ from normals") {
  SynthSpec normal = machine_spec(5);
  SynthSpec anomalous = normal;
  anomalous.params.detune_cents = 35.0;
  anomalous.params.click_rate_hz = 1.5;
  Waveform wn = synthesize(normal);
  Waveform wa = synthesize(anomalous);
  REQUIRE(wn.samples.size() == wa.samples.size());
  CHECK(wn.samples != wa.samples);
}

TEST_CASE("invalid parameters are rejected") {
  SynthSpec s = machine_spec(1);
  s.duration_s = 0.0;
  CHECK_THROWS_AS(synthesize(s), InvalidParams);

  s = machine_spec(1);
  s.params.f0_hz = -1.0;
  CHECK_THROWS_AS(synthesize(s), InvalidParams);

  s = machine_spec(1);
  s.params.harmonic_decay = 1.5;
  CHECK_THROWS_AS(synthesize(s), InvalidParams);

  s = noise_spec(SynthKind::kNoiseNonstationary, 1);
  s.params.burst_density = 1.0;  // must be strictly inside (0, 1)
  CHECK_THROWS_AS(synthesize(s), InvalidParams);

  s = noise_spec(SynthKind::kNoiseStationary, 1);
  s.params.lowpass_cutoff_hz = 9000.0;  // above Nyquist
  CHECK_THROWS_AS(synthesize(s), InvalidParams);
}

TEST_CASE("spec JSON round trip carries the explicit seed") {
  SynthSpec spec = machine_spec(0xdeadbeefcafe1234ull, 3.5);
  spec.params.detune_cents = 20.0;
  SynthSpec back = synth_spec_from_json(synth_spec_to_json(spec));
  CHECK(back.class_id == spec.class_id);
  CHECK(back.kind == spec.kind);
  CHECK(back.seed == spec.seed);
  CHECK(back.duration_s == spec.duration_s);
  CHECK(back.params.detune_cents == spec.params.detune_cents);
  CHECK(synthesize(back).samples == synthesize(spec).samples);
}

TEST_CASE("pool clips render deterministically") {
  PretrainConfig cfg;
  cfg.clips_per_class = 2;
  cfg.clips_per_noise_class = 3;
  cfg.duration_s = 1.0;
  PretrainCorpus corpus = build_pretrain_corpus(cfg);
  CHECK(corpus.c_machines == 24);
  CHECK(corpus.n_noises == 4);
  CHECK(corpus.machines.size() == 48);
  CHECK(corpus.noises.size() == 12);
  CHECK(render_clip(corpus.machines[0]).samples ==
        render_clip(corpus.machines[0]).samples);
  CHECK(corpus.fingerprint() == build_pretrain_corpus(cfg).fingerprint());
}

}  // TEST_SUITE
