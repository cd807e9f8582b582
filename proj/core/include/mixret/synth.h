// core/include/mixret/synth.h

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

#ifndef MIXRET_SYNTH_H_
#define MIXRET_SYNTH_H_

#include <cstdint>
#include <string>

#include "mixret/wave.h"

namespace mixret {

enum class SynthKind { kMachine, kNoiseStationary, kNoiseNonstationary };

std::string to_string(SynthKind k);
SynthKind synth_kind_from_string(const std::string& s);

// Generator parameters. Machine clips are a harmonic tone stack under a slow
// amplitude envelope plus a small broadband floor; stationary noise is
// tilt-filtered wideband noise; non-stationary noise adds randomized
// amplitude bursts on top of the stationary generator. Anomalous machine
// variants detune the upper harmonics and/or add transient clicks.
struct SynthParams {
  // machine kind
  double f0_hz = 150.0;
  int n_harmonics = 8;
  double harmonic_decay = 0.75;   // amplitude ratio between consecutive harmonics
  double mod_rate_hz = 2.0;       // amplitude envelope rate
  double mod_depth = 0.35;        // envelope depth in [0, 1)
  double tone_noise_floor = 0.02; // broadband floor relative to tone RMS

  // noise kinds: spectral tilt via a one-pole low-pass blended with the
  // white input
  double lowpass_cutoff_hz = 900.0;
  double lowpass_mix = 0.65;      // 0 = white, 1 = fully low-passed

  // non-stationary kind: at most one burst per one-second slot
  double burst_density = 0.5;     // probability a slot carries a burst, in (0, 1)
  double burst_gain_db = 13.0;
  double burst_len_s = 0.35;

  // anomaly knobs (machine kind only)
  double detune_cents = 0.0;      // applied to harmonics >= 2
  double click_rate_hz = 0.0;     // transient clicks per second
  double click_gain = 4.0;        // click amplitude in units of clip RMS

  double target_rms = 0.25;       // output level before any anomaly clicks
};

// Fully determines a clip: identical specs produce bit-identical samples.
struct SynthSpec {
  std::string class_id;
  SynthKind kind = SynthKind::kMachine;
  uint64_t seed = 0;
  double duration_s = 10.0;
  int sample_rate = kSampleRate;
  SynthParams params;
};

// Pure function of the spec. Throws InvalidParams when a parameter is out of
// range for the requested kind.
Waveform synthesize(const SynthSpec& spec);

std::string synth_spec_to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const std::string& json);

}  // namespace mixret

#endif  // MIXRET_SYNTH_H_
