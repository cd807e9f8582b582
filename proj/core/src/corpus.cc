// core/src/corpus.cc

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

#include "mixret/corpus.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>

namespace mixret {

namespace {

// Pre-training machine families. Voices are spread across the spectrum and
// kept away from the evaluation machines below.
struct MachineVoice {
  double f0_hz;
  int n_harmonics;
  double harmonic_decay;
  double mod_rate_hz;
  double mod_depth;
};

const MachineVoice kPretrainVoices[] = {
    {92.0, 10, 0.82, 1.1, 0.30},  {138.0, 9, 0.78, 2.3, 0.40},
    {221.0, 8, 0.72, 0.7, 0.25},  {334.0, 7, 0.66, 3.1, 0.45},
    {487.0, 6, 0.60, 1.7, 0.35},  {703.0, 5, 0.55, 4.1, 0.50},
};

// Attribute sub-classes: pitch offset (semitones) and envelope-rate factor.
const double kAttrSemitones[] = {0.0, 2.0, 5.0, 9.0};
const double kAttrModFactor[] = {0.6, 1.0, 1.7, 2.8};

// Pre-training noise classes: two stationary tilts, two burst profiles.
struct NoiseVoice {
  SynthKind kind;
  double cutoff_hz;
  double mix;
  double burst_density;
  double burst_gain_db;
};

const NoiseVoice kPretrainNoises[] = {
    {SynthKind::kNoiseStationary, 400.0, 0.80, 0.0, 0.0},
    {SynthKind::kNoiseStationary, 2100.0, 0.50, 0.0, 0.0},
    {SynthKind::kNoiseNonstationary, 900.0, 0.65, 0.40, 12.0},
    {SynthKind::kNoiseNonstationary, 1500.0, 0.55, 0.60, 15.0},
};
constexpr int kNumPretrainNoiseClasses = 4;

// Evaluation machines (disjoint voices).
const char* kEvalMachineNames[] = {"rotor", "pump", "belt", "press", "drill", "conveyor"};

const MachineVoice kEvalVoices[] = {
    {112.0, 9, 0.80, 1.4, 0.35},  {173.0, 8, 0.74, 2.6, 0.30},
    {262.0, 8, 0.70, 0.9, 0.45},  {401.0, 7, 0.64, 3.4, 0.40},
    {563.0, 6, 0.58, 2.0, 0.30},  {822.0, 5, 0.52, 4.6, 0.45},
};

// Evaluation factory noises.
const NoiseVoice kEvalStationary = {SynthKind::kNoiseStationary, 700.0, 0.70, 0.0, 0.0};
const NoiseVoice kEvalNonstationary = {SynthKind::kNoiseNonstationary, 1200.0, 0.50, 0.50, 13.0};

// Evaluation clips are leveled low enough that a -10 dB mixture (noise gain
// sqrt(10)) still fits PCM16 without routine clipping on export.
constexpr double kEvalTargetRms = 0.08;

SynthSpec machine_spec(const std::string& class_id, const MachineVoice& voice,
                       double semitones, double mod_factor, double duration_s,
                       uint64_t seed) {
  SynthSpec s;
  s.class_id = class_id;
  s.kind = SynthKind::kMachine;
  s.seed = seed;
  s.duration_s = duration_s;
  s.params.f0_hz = voice.f0_hz * std::pow(2.0, semitones / 12.0);
  s.params.n_harmonics = voice.n_harmonics;
  s.params.harmonic_decay = voice.harmonic_decay;
  s.params.mod_rate_hz = voice.mod_rate_hz * mod_factor;
  s.params.mod_depth = voice.mod_depth;
  return s;
}

SynthSpec noise_spec(const std::string& class_id, const NoiseVoice& voice,
                     double duration_s, uint64_t seed) {
  SynthSpec s;
  s.class_id = class_id;
  s.kind = voice.kind;
  s.seed = seed;
  s.duration_s = duration_s;
  s.params.lowpass_cutoff_hz = voice.cutoff_hz;
  s.params.lowpass_mix = voice.mix;
  if (voice.kind == SynthKind::kNoiseNonstationary) {
    s.params.burst_density = voice.burst_density;
    s.params.burst_gain_db = voice.burst_gain_db;
  }
  return s;
}

std::string zero_pad(int v, int width) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%0*d", width, v);
  return buf;
}

}  // namespace

Waveform render_clip(const PoolClip& clip) {
  if (!clip.wav_path.empty()) return read_wav(clip.wav_path);
  return synthesize(clip.spec);
}

uint64_t PretrainCorpus::fingerprint() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const PoolClip& c : machines) {
    h = fnv1a64(c.id.data(), c.id.size(), h);
    h = fnv1a64(&c.spec.seed, sizeof(c.spec.seed), h);
  }
  for (const PoolClip& c : noises) {
    h = fnv1a64(c.id.data(), c.id.size(), h);
    h = fnv1a64(&c.spec.seed, sizeof(c.spec.seed), h);
  }
  uint64_t dims[2] = {static_cast<uint64_t>(c_machines), static_cast<uint64_t>(n_noises)};
  return fnv1a64(dims, sizeof(dims), h);
}

PretrainCorpus build_pretrain_corpus(const PretrainConfig& config) {
  if (config.machine_families < 1 || config.machine_families > 6)
    throw InvalidParams("pretrain corpus: machine_families must be in [1, 6]");
  if (config.attributes_per_family < 1 || config.attributes_per_family > 4)
    throw InvalidParams("pretrain corpus: attributes_per_family must be in [1, 4]");
  if (config.clips_per_class < 1 || config.clips_per_noise_class < 1)
    throw InvalidParams("pretrain corpus: clip counts must be >= 1");

  PretrainCorpus corpus;
  corpus.c_machines = config.machine_families * config.attributes_per_family;
  corpus.n_noises = kNumPretrainNoiseClasses;

  for (int m = 0; m < config.machine_families; ++m) {
    for (int a = 0; a < config.attributes_per_family; ++a) {
      int class_index = m * config.attributes_per_family + a;
      std::string class_id = "pm" + std::to_string(m) + "_a" + std::to_string(a);
      for (int i = 0; i < config.clips_per_class; ++i) {
        PoolClip clip;
        clip.id = class_id + "_" + zero_pad(i, 3);
        clip.class_index = class_index;
        clip.spec = machine_spec(class_id, kPretrainVoices[m], kAttrSemitones[a],
                                 kAttrModFactor[a], config.duration_s,
                                 mix_seed(config.seed, hash_string(clip.id)));
        corpus.machines.push_back(std::move(clip));
      }
    }
  }
  for (int k = 0; k < kNumPretrainNoiseClasses; ++k) {
    std::string class_id = "pn" + std::to_string(k);
    for (int i = 0; i < config.clips_per_noise_class; ++i) {
      PoolClip clip;
      clip.id = class_id + "_" + zero_pad(i, 3);
      clip.class_index = corpus.c_machines + k;
      clip.spec = noise_spec(class_id, kPretrainNoises[k], config.duration_s,
                             mix_seed(config.seed, hash_string(clip.id)));
      corpus.noises.push_back(std::move(clip));
    }
  }
  return corpus;
}

PretrainCorpus build_pretrain_corpus_with_recipe(const PretrainConfig& config,
                                                 const std::string& recipe) {
  if (recipe == "base") return build_pretrain_corpus(config);
  if (recipe == "half") {
    PretrainConfig half = config;
    half.clips_per_class = std::max(1, config.clips_per_class / 2);
    half.clips_per_noise_class = std::max(1, config.clips_per_noise_class / 2);
    return build_pretrain_corpus(half);
  }
  if (recipe == "plus-eval-reference") {
    PretrainCorpus corpus = build_pretrain_corpus(config);
    EvalDataConfig eval_cfg;
    eval_cfg.duration_s = config.duration_s;
    eval_cfg.seed = mix_seed(config.seed, 0x65766c7265666d78ull);
    const auto& names = eval_machine_types();
    int base_c = corpus.c_machines;
    corpus.c_machines += static_cast<int>(names.size());
    // Machine class indices shift when C grows; noises were appended with the
    // old offset, so rebuild their indices afterwards.
    for (size_t m = 0; m < names.size(); ++m) {
      EvalMachinePool pool = build_eval_machine_pool(
          names[m], config.clips_per_class, 0, 0, 0, eval_cfg);
      for (PoolClip clip : pool.source_normals) {
        clip.class_index = base_c + static_cast<int>(m);
        corpus.machines.push_back(std::move(clip));
      }
    }
    int noise_base = corpus.c_machines;
    for (PoolClip& clip : corpus.noises)
      clip.class_index = noise_base + (clip.class_index - base_c);
    for (int k = 0; k < 2; ++k) {
      SynthKind kind = k == 0 ? SynthKind::kNoiseStationary : SynthKind::kNoiseNonstationary;
      std::vector<PoolClip> extra =
          build_eval_noise_pool(kind, config.clips_per_noise_class, eval_cfg);
      for (PoolClip& clip : extra) {
        clip.class_index = noise_base + corpus.n_noises + k;
        corpus.noises.push_back(std::move(clip));
      }
    }
    corpus.n_noises += 2;
    return corpus;
  }
  throw InvalidParams("unknown pre-training data recipe: " + recipe);
}

const std::vector<std::string>& eval_machine_types() {
  static const std::vector<std::string> names(std::begin(kEvalMachineNames),
                                              std::end(kEvalMachineNames));
  return names;
}

EvalMachinePool build_eval_machine_pool(const std::string& machine_type,
                                        int n_source_normal, int n_target_normal,
                                        int n_source_anomaly, int n_target_anomaly,
                                        const EvalDataConfig& config) {
  const auto& names = eval_machine_types();
  auto it = std::find(names.begin(), names.end(), machine_type);
  if (it == names.end())
    throw InvalidParams("unknown evaluation machine type: " + machine_type);
  const MachineVoice& voice = kEvalVoices[it - names.begin()];

  EvalMachinePool pool;
  pool.machine_type = machine_type;
  auto make = [&](const std::string& domain, bool anomalous, int index) {
    PoolClip clip;
    clip.id = machine_type + "_" + domain + (anomalous ? "_anomaly_" : "_normal_") +
              zero_pad(index, 4);
    clip.domain = domain;
    clip.anomalous = anomalous;
    // Target domain: same machine under shifted operating conditions.
    double semis = domain == "target" ? 0.5 : 0.0;
    double mod_factor = domain == "target" ? 1.6 : 1.0;
    clip.spec = machine_spec(machine_type, voice, semis, mod_factor,
                             config.duration_s,
                             mix_seed(config.seed, hash_string(clip.id)));
    clip.spec.params.target_rms = kEvalTargetRms;
    if (anomalous) {
      clip.spec.params.detune_cents = 35.0 * config.anomaly_severity;
      clip.spec.params.click_rate_hz = 1.5 * config.anomaly_severity;
    }
    return clip;
  };
  for (int i = 0; i < n_source_normal; ++i)
    pool.source_normals.push_back(make("source", false, i));
  for (int i = 0; i < n_target_normal; ++i)
    pool.target_normals.push_back(make("target", false, i));
  for (int i = 0; i < n_source_anomaly; ++i)
    pool.source_anomalies.push_back(make("source", true, i));
  for (int i = 0; i < n_target_anomaly; ++i)
    pool.target_anomalies.push_back(make("target", true, i));
  return pool;
}

std::vector<PoolClip> build_eval_noise_pool(SynthKind kind, int count,
                                            const EvalDataConfig& config) {
  if (kind == SynthKind::kMachine)
    throw InvalidParams("eval noise pool: kind must be a noise kind");
  const NoiseVoice& voice =
      kind == SynthKind::kNoiseStationary ? kEvalStationary : kEvalNonstationary;
  std::string prefix = kind == SynthKind::kNoiseStationary ? "stat" : "nonstat";
  std::vector<PoolClip> pool;
  pool.reserve(count);
  for (int i = 0; i < count; ++i) {
    PoolClip clip;
    clip.id = prefix + "_" + zero_pad(i, 4);
    clip.spec = noise_spec(prefix, voice, config.duration_s,
                           mix_seed(config.seed, hash_string(clip.id)));
    clip.spec.params.target_rms = kEvalTargetRms;
    pool.push_back(std::move(clip));
  }
  return pool;
}

std::vector<PoolClip> pool_from_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoFailure("pool_from_directory: not a directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<PoolClip> pool;
  pool.reserve(paths.size());
  for (const std::string& p : paths) {
    PoolClip clip;
    clip.wav_path = p;
    clip.id = fs::path(p).stem().string();
    clip.anomalous = clip.id.find("anomaly") != std::string::npos;
    pool.push_back(std::move(clip));
  }
  return pool;
}

}  // namespace mixret
