// core/include/mixret/dataset.h

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

#ifndef MIXRET_DATASET_H_
#define MIXRET_DATASET_H_

#include <string>
#include <vector>

#include "mixret/corpus.h"

namespace mixret {

enum class SubsetName { kFactoryA, kFactoryB, kMismatch };

std::string to_string(SubsetName name);
SubsetName subset_from_string(const std::string& s);

// Per (machine_type, snr) cell counts. Defaults preserve the ~99:1
// source/target reference ratio of the full protocol at one tenth scale.
struct SubsetCounts {
  int ref_source = 90;
  int ref_target = 10;
  int test_source_normal = 10;
  int test_source_anomalous = 10;
  int test_target_normal = 10;
  int test_target_anomalous = 10;

  int ref_total() const { return ref_source + ref_target; }
  int test_total() const {
    return test_source_normal + test_source_anomalous + test_target_normal +
           test_target_anomalous;
  }
  int total() const { return ref_total() + test_total(); }
};

// Controlled evaluation conditions: factory_a mixes everything with
// stationary noise, factory_b with non-stationary noise, and mismatch uses
// non-stationary noise for references but stationary noise for test clips,
// inducing a deliberate reference/test distribution shift.
struct SubsetSpec {
  SubsetName name = SubsetName::kFactoryA;
  SynthKind reference_noise_kind = SynthKind::kNoiseStationary;
  SynthKind test_noise_kind = SynthKind::kNoiseStationary;
  std::vector<double> snr_grid = {-10, -5, 0, 5, 10, 20, 30};
  SubsetCounts counts;

  static SubsetSpec for_name(SubsetName name);
  static SubsetSpec for_name(SubsetName name, std::vector<double> grid);
  void validate() const;
};

struct ManifestRow {
  std::string clip_path;
  std::string machine_type;
  std::string split;    // "reference" | "test"
  std::string domain;   // "source" | "target"
  bool is_anomalous = false;
  double snr_db = 0.0;
  std::string noise_clip_id;
  uint64_t seed = 0;    // synthesis seed of the clean machine clip

  std::string machine_clip_id() const;  // parsed back out of clip_path
};

struct DatasetManifest {
  std::string subset;
  std::vector<ManifestRow> rows;

  // CSV column order: clip_path, machine_type, split, domain, is_anomalous,
  // snr_db, noise_clip_id, seed.
  void save_csv(const std::string& path) const;
  static DatasetManifest load_csv(const std::string& path);
  uint64_t content_hash() const;
};

// Clean machine and noise pools shared by all subsets of one dataset.
struct EvalPools {
  std::vector<EvalMachinePool> machines;
  std::vector<PoolClip> stationary_noise;
  std::vector<PoolClip> nonstationary_noise;

  const std::vector<PoolClip>& noise_for(SynthKind kind) const;
  const PoolClip* find_machine_clip(const std::string& machine_type,
                                    const std::string& clip_id) const;
  const PoolClip* find_noise_clip(const std::string& clip_id) const;
};

// Sizes the pools for the worst-case cell over all given specs.
EvalPools build_eval_pools(const std::vector<SubsetSpec>& specs,
                           const EvalDataConfig& config);

struct BuildResult {
  DatasetManifest manifest;
  // In-memory mode (out_dir empty): mixtures aligned with manifest rows.
  std::vector<Waveform> mixtures;
};

// Pairs every clean clip with a noise segment unique within its
// (machine_type, snr) cell, mixes with the noise scaled relative to the
// clean signal's power, and (when out_dir is set) writes PCM16 WAVs plus the
// manifest. Deterministic per seed. Throws InsufficientMachinePool /
// InsufficientNoisePool.
//
// With out_dir empty and keep_mixtures false only the manifest is produced;
// pair it with ResynthClipSource for datasets too large to hold mixed.
BuildResult build_subset(const SubsetSpec& spec, const EvalPools& pools,
                         uint64_t seed, const std::string& out_dir = "",
                         bool keep_mixtures = true);

}  // namespace mixret

#endif  // MIXRET_DATASET_H_
