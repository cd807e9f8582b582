// core/include/mixret/corpus.h

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

#ifndef MIXRET_CORPUS_H_
#define MIXRET_CORPUS_H_

#include <string>
#include <vector>

#include "mixret/synth.h"

namespace mixret {

// One renderable clip: either a synthesis spec or a path to an ingested WAV.
struct PoolClip {
  std::string id;
  SynthSpec spec;
  std::string wav_path;     // non-empty => read from disk instead of synthesizing
  int class_index = -1;     // tagging class, -1 when unlabeled
  bool anomalous = false;
  std::string domain;       // "source"/"target" for evaluation clips, else ""
};

Waveform render_clip(const PoolClip& clip);

// ---------------------------------------------------------------------------
// Pre-training corpus: machine-attribute classes fill the C tagging slots,
// noise classes fill the N slots. Machine families and the evaluation
// machines below are disjoint by construction (different voices).
// ---------------------------------------------------------------------------
struct PretrainConfig {
  int machine_families = 6;
  int attributes_per_family = 4;   // C = families * attributes
  int clips_per_class = 6;
  int clips_per_noise_class = 36;  // N = 4 (two stationary, two non-stationary)
  double duration_s = 10.0;
  uint64_t seed = 1;
};

struct PretrainCorpus {
  std::vector<PoolClip> machines;  // class_index in [0, C)
  std::vector<PoolClip> noises;    // class_index in [C, C+N)
  int c_machines = 0;
  int n_noises = 0;

  int n_classes() const { return c_machines + n_noises; }
  uint64_t fingerprint() const;
};

PretrainCorpus build_pretrain_corpus(const PretrainConfig& config);

// Data-composition variants for pre-training-data sweeps: "base" is the
// standard corpus, "half" halves the machine clips per class, and
// "plus-eval-reference" additionally folds evaluation-domain machines and
// noises into the label space (deliberately breaking train/eval disjointness
// to measure the domain-matched advantage).
PretrainCorpus build_pretrain_corpus_with_recipe(const PretrainConfig& config,
                                                 const std::string& recipe);

// ---------------------------------------------------------------------------
// Evaluation data: six machine voices disjoint from the pre-training
// families, each with a source domain and a parameter-shifted target domain;
// anomalies detune the upper harmonics and add transient clicks, scaled by
// anomaly_severity.
// ---------------------------------------------------------------------------
struct EvalDataConfig {
  double duration_s = 10.0;
  double anomaly_severity = 1.0;
  uint64_t seed = 2;
};

const std::vector<std::string>& eval_machine_types();

struct EvalMachinePool {
  std::string machine_type;
  std::vector<PoolClip> source_normals;
  std::vector<PoolClip> target_normals;
  std::vector<PoolClip> source_anomalies;
  std::vector<PoolClip> target_anomalies;
};

EvalMachinePool build_eval_machine_pool(const std::string& machine_type,
                                        int n_source_normal, int n_target_normal,
                                        int n_source_anomaly, int n_target_anomaly,
                                        const EvalDataConfig& config);

// Noise segment pools for the evaluation factories. kNoiseStationary draws
// the "factory A" voice, kNoiseNonstationary the "factory B" voice.
std::vector<PoolClip> build_eval_noise_pool(SynthKind kind, int count,
                                            const EvalDataConfig& config);

// Ingests every .wav in a directory (sorted by filename). A clip is marked
// anomalous when its filename contains "anomaly". Files must be PCM16 mono
// 16 kHz.
std::vector<PoolClip> pool_from_directory(const std::string& dir);

}  // namespace mixret

#endif  // MIXRET_CORPUS_H_
