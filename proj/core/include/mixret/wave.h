// core/include/mixret/wave.h

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

#ifndef MIXRET_WAVE_H_
#define MIXRET_WAVE_H_

#include <string>
#include <vector>

#include "mixret/common.h"

namespace mixret {

constexpr int kSampleRate = 16000;

// Mono waveform, dimensionless amplitudes with nominal range [-1, 1]. Values
// outside that range are legal in memory; only WAV export clamps.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  Waveform() = default;
  Waveform(std::vector<double> s, int rate) : samples(std::move(s)), sample_rate(rate) {}

  size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Mean power (1/n) * sum(x[i]^2). Accumulates in extended precision so the
// SNR identities below hold to well under 1e-9 dB.
// Throws EmptyWaveform on an empty input.
double mean_power(const Waveform& w);

struct MixResult {
  Waveform mixture;
  double a1 = 0.0;              // gain applied to the first component
  double a2 = 0.0;              // gain applied to the second component
  double achieved_snr_db = 0.0; // 10*log10((a1^2*P1)/(a2^2*P2))
};

// SNR-exact mixing with the noise normalized to unit power: with
// R = 10^(snr_db/10), a1 = sqrt(R/P1) and a2 = sqrt(1/P2), so that
// (a1^2 P1)/(a2^2 P2) = R analytically. Used for training-time mixtures.
// Throws LengthMismatch / RateMismatch / ZeroPowerComponent.
MixResult mix_at_snr_unitnoise(const Waveform& x1, const Waveform& x2, double snr_db);

// SNR-exact mixing that keeps the clean signal at unit gain and scales the
// noise relative to the clean signal's average power: a1 = 1,
// a2 = sqrt(P1/(R*P2)). Used when constructing evaluation corpora.
MixResult mix_at_snr_scalenoise(const Waveform& clean, const Waveform& noise, double snr_db);

// RIFF/WAVE PCM16 mono I/O. Only 16 kHz files are accepted; anything else is
// UnsupportedFormat. write_wav clamps samples to [-1, 1] before quantizing;
// a write/read round trip preserves each sample to within 1/32768.
Waveform read_wav(const std::string& path);
void write_wav(const Waveform& w, const std::string& path);

}  // namespace mixret

#endif  // MIXRET_WAVE_H_
