// core/src/synth.cc

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

#include "mixret/synth.h"

#include <cmath>

#include "json.hpp"

namespace mixret {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

void validate(const SynthSpec& spec) {
  const SynthParams& p = spec.params;
  if (spec.duration_s <= 0.0) throw InvalidParams("synthesize: duration_s must be > 0");
  if (spec.sample_rate <= 0) throw InvalidParams("synthesize: sample_rate must be > 0");
  if (p.target_rms <= 0.0) throw InvalidParams("synthesize: target_rms must be > 0");
  switch (spec.kind) {
    case SynthKind::kMachine:
      if (p.f0_hz <= 0.0 || p.f0_hz >= spec.sample_rate / 2.0)
        throw InvalidParams("synthesize: f0_hz out of range");
      if (p.n_harmonics < 1) throw InvalidParams("synthesize: n_harmonics must be >= 1");
      if (p.harmonic_decay <= 0.0 || p.harmonic_decay > 1.0)
        throw InvalidParams("synthesize: harmonic_decay must be in (0, 1]");
      if (p.mod_depth < 0.0 || p.mod_depth >= 1.0)
        throw InvalidParams("synthesize: mod_depth must be in [0, 1)");
      if (p.mod_rate_hz < 0.0) throw InvalidParams("synthesize: mod_rate_hz must be >= 0");
      if (p.tone_noise_floor < 0.0) throw InvalidParams("synthesize: tone_noise_floor < 0");
      if (p.click_rate_hz < 0.0) throw InvalidParams("synthesize: click_rate_hz < 0");
      break;
    case SynthKind::kNoiseStationary:
    case SynthKind::kNoiseNonstationary:
      if (p.lowpass_cutoff_hz <= 0.0 || p.lowpass_cutoff_hz >= spec.sample_rate / 2.0)
        throw InvalidParams("synthesize: lowpass_cutoff_hz out of range");
      if (p.lowpass_mix < 0.0 || p.lowpass_mix > 1.0)
        throw InvalidParams("synthesize: lowpass_mix must be in [0, 1]");
      if (spec.kind == SynthKind::kNoiseNonstationary) {
        if (p.burst_density <= 0.0 || p.burst_density >= 1.0)
          throw InvalidParams("synthesize: burst_density must be in (0, 1)");
        if (p.burst_gain_db <= 0.0) throw InvalidParams("synthesize: burst_gain_db <= 0");
        if (p.burst_len_s <= 0.0 || p.burst_len_s > 1.0)
          throw InvalidParams("synthesize: burst_len_s must be in (0, 1]");
      }
      break;
  }
}

void scale_to_rms(std::vector<double>& x, double target_rms) {
  long double acc = 0.0L;
  for (double v : x) acc += static_cast<long double>(v) * v;
  double rms = std::sqrt(static_cast<double>(acc / static_cast<long double>(x.size())));
  if (rms <= 0.0) return;
  double g = target_rms / rms;
  for (double& v : x) v *= g;
}

std::vector<double> tilted_noise(int n, int rate, const SynthParams& p, Rng& rng) {
  std::vector<double> x(n);
  double a = std::exp(-kTwoPi * p.lowpass_cutoff_hz / rate);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    double w = rng.gaussian();
    z = a * z + (1.0 - a) * w;
    // The low-passed branch is much quieter than the white one; rebalance so
    // the blend parameter has audible effect across its range.
    double lp = z / std::sqrt((1.0 - a) / (1.0 + a));
    x[i] = (1.0 - p.lowpass_mix) * w + p.lowpass_mix * lp;
  }
  return x;
}

std::vector<double> make_machine(const SynthSpec& spec, Rng& rng) {
  const SynthParams& p = spec.params;
  const int rate = spec.sample_rate;
  const int n = static_cast<int>(std::llround(spec.duration_s * rate));

  std::vector<double> phase(p.n_harmonics);
  for (int h = 0; h < p.n_harmonics; ++h) phase[h] = rng.uniform(0.0, kTwoPi);
  double env_phase = rng.uniform(0.0, kTwoPi);
  double detune = std::pow(2.0, p.detune_cents / 1200.0);

  std::vector<double> x(n, 0.0);
  for (int h = 0; h < p.n_harmonics; ++h) {
    double f = (h + 1) * p.f0_hz * (h >= 1 ? detune : 1.0);
    if (f >= rate / 2.0) break;  // keep the stack below Nyquist
    double amp = std::pow(p.harmonic_decay, h);
    double w = kTwoPi * f / rate;
    for (int i = 0; i < n; ++i) x[i] += amp * std::sin(w * i + phase[h]);
  }
  if (p.mod_depth > 0.0 && p.mod_rate_hz > 0.0) {
    double wm = kTwoPi * p.mod_rate_hz / rate;
    for (int i = 0; i < n; ++i)
      x[i] *= 1.0 + p.mod_depth * std::sin(wm * i + env_phase);
  }
  if (p.tone_noise_floor > 0.0) {
    for (int i = 0; i < n; ++i) x[i] += p.tone_noise_floor * rng.gaussian();
  }
  scale_to_rms(x, p.target_rms);

  // Anomaly clicks: short damped 3.5 kHz bursts at random positions, added
  // after level normalization so their relative amplitude is controlled.
  if (p.click_rate_hz > 0.0) {
    int n_clicks = std::max(1, static_cast<int>(std::llround(p.click_rate_hz * spec.duration_s)));
    int click_len = std::min(n, rate / 125);  // 8 ms
    double amp = p.click_gain * p.target_rms;
    for (int c = 0; c < n_clicks; ++c) {
      int start = rng.uniform_int(0, std::max(0, n - click_len - 1));
      for (int j = 0; j < click_len && start + j < n; ++j) {
        double dt = static_cast<double>(j) / rate;
        x[start + j] += amp * std::exp(-dt / 0.002) * std::sin(kTwoPi * 3500.0 * dt);
      }
    }
  }
  return x;
}

std::vector<double> make_noise(const SynthSpec& spec, Rng& rng) {
  const SynthParams& p = spec.params;
  const int rate = spec.sample_rate;
  const int n = static_cast<int>(std::llround(spec.duration_s * rate));
  std::vector<double> x = tilted_noise(n, rate, p, rng);

  if (spec.kind == SynthKind::kNoiseNonstationary) {
    int slots = std::max(1, static_cast<int>(spec.duration_s));
    std::vector<char> has_burst(slots, 0);
    int count = 0;
    for (int s = 0; s < slots; ++s) {
      has_burst[s] = rng.uniform() < p.burst_density ? 1 : 0;
      count += has_burst[s];
    }
    // Keep at least one loud and one quiet second so the clip is measurably
    // non-stationary at any draw.
    if (slots >= 2) {
      if (count == 0) has_burst[rng.uniform_int(0, slots - 1)] = 1;
      if (count == slots) has_burst[rng.uniform_int(0, slots - 1)] = 0;
    } else if (count == 0) {
      has_burst[0] = 1;
    }
    double gain = std::pow(10.0, p.burst_gain_db / 20.0);
    int burst_len = std::min(n, static_cast<int>(std::llround(p.burst_len_s * rate)));
    int ramp = std::max(1, burst_len / 10);
    for (int s = 0; s < slots; ++s) {
      if (!has_burst[s]) continue;
      int slot_start = s * rate;
      int slot_len = std::min(rate, n - slot_start);
      if (slot_len <= burst_len) continue;
      int start = slot_start + rng.uniform_int(0, slot_len - burst_len - 1);
      for (int j = 0; j < burst_len; ++j) {
        double shape = 1.0;
        if (j < ramp) shape = 0.5 - 0.5 * std::cos(M_PI * j / ramp);
        else if (j >= burst_len - ramp) shape = 0.5 - 0.5 * std::cos(M_PI * (burst_len - 1 - j) / ramp);
        x[start + j] *= 1.0 + (gain - 1.0) * shape;
      }
    }
  }
  scale_to_rms(x, p.target_rms);
  return x;
}

}  // namespace

std::string to_string(SynthKind k) {
  switch (k) {
    case SynthKind::kMachine: return "machine";
    case SynthKind::kNoiseStationary: return "noise_stationary";
    case SynthKind::kNoiseNonstationary: return "noise_nonstationary";
  }
  return "machine";
}

SynthKind synth_kind_from_string(const std::string& s) {
  if (s == "machine") return SynthKind::kMachine;
  if (s == "noise_stationary") return SynthKind::kNoiseStationary;
  if (s == "noise_nonstationary") return SynthKind::kNoiseNonstationary;
  throw InvalidParams("unknown synth kind: " + s);
}

Waveform synthesize(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  Waveform w;
  w.sample_rate = spec.sample_rate;
  w.samples = spec.kind == SynthKind::kMachine ? make_machine(spec, rng)
                                               : make_noise(spec, rng);
  return w;
}

std::string synth_spec_to_json(const SynthSpec& spec) {
  nlohmann::json j;
  j["class_id"] = spec.class_id;
  j["kind"] = to_string(spec.kind);
  j["seed"] = spec.seed;
  j["duration_s"] = spec.duration_s;
  j["sample_rate"] = spec.sample_rate;
  const SynthParams& p = spec.params;
  j["params"] = {
      {"f0_hz", p.f0_hz},
      {"n_harmonics", p.n_harmonics},
      {"harmonic_decay", p.harmonic_decay},
      {"mod_rate_hz", p.mod_rate_hz},
      {"mod_depth", p.mod_depth},
      {"tone_noise_floor", p.tone_noise_floor},
      {"lowpass_cutoff_hz", p.lowpass_cutoff_hz},
      {"lowpass_mix", p.lowpass_mix},
      {"burst_density", p.burst_density},
      {"burst_gain_db", p.burst_gain_db},
      {"burst_len_s", p.burst_len_s},
      {"detune_cents", p.detune_cents},
      {"click_rate_hz", p.click_rate_hz},
      {"click_gain", p.click_gain},
      {"target_rms", p.target_rms},
  };
  return j.dump();
}

SynthSpec synth_spec_from_json(const std::string& json) {
  nlohmann::json j = nlohmann::json::parse(json);
  SynthSpec spec;
  spec.class_id = j.at("class_id").get<std::string>();
  spec.kind = synth_kind_from_string(j.at("kind").get<std::string>());
  spec.seed = j.at("seed").get<uint64_t>();
  spec.duration_s = j.at("duration_s").get<double>();
  spec.sample_rate = j.value("sample_rate", kSampleRate);
  const nlohmann::json& q = j.at("params");
  SynthParams& p = spec.params;
  p.f0_hz = q.value("f0_hz", p.f0_hz);
  p.n_harmonics = q.value("n_harmonics", p.n_harmonics);
  p.harmonic_decay = q.value("harmonic_decay", p.harmonic_decay);
  p.mod_rate_hz = q.value("mod_rate_hz", p.mod_rate_hz);
  p.mod_depth = q.value("mod_depth", p.mod_depth);
  p.tone_noise_floor = q.value("tone_noise_floor", p.tone_noise_floor);
  p.lowpass_cutoff_hz = q.value("lowpass_cutoff_hz", p.lowpass_cutoff_hz);
  p.lowpass_mix = q.value("lowpass_mix", p.lowpass_mix);
  p.burst_density = q.value("burst_density", p.burst_density);
  p.burst_gain_db = q.value("burst_gain_db", p.burst_gain_db);
  p.burst_len_s = q.value("burst_len_s", p.burst_len_s);
  p.detune_cents = q.value("detune_cents", p.detune_cents);
  p.click_rate_hz = q.value("click_rate_hz", p.click_rate_hz);
  p.click_gain = q.value("click_gain", p.click_gain);
  p.target_rms = q.value("target_rms", p.target_rms);
  return spec;
}

}  // namespace mixret
