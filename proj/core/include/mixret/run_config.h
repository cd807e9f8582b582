// core/include/mixret/run_config.h

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

#ifndef MIXRET_RUN_CONFIG_H_
#define MIXRET_RUN_CONFIG_H_

#include <string>
#include <vector>

#include "mixret/experiment.h"

namespace mixret {

struct SynthRunConfig {
  std::vector<std::string> subsets = {"factory_a", "factory_b", "mismatch"};
  std::vector<double> snr_grid = {-10, -5, 0, 5, 10, 20, 30};
  SubsetCounts counts;
  double duration_s = 10.0;
  double anomaly_severity = 1.0;
};

struct EvalRunConfig {
  int layer = 0;  // 0 = encoder default tap
  int k = 1;
  std::string metric = "euclidean";  // or "cosine"
  double pauc_p = kDefaultPaucP;
  double oracle_lambda = 0.5;
};

struct SweepRunConfig {
  std::string axis = "training_snr";
  std::vector<std::string> grid = {"0", "+-5"};
};

// Everything a run needs, serializable as one JSON document. A run
// directory's config.json round-trips to an identical RunConfig.
struct RunConfig {
  uint64_t seed = 0;
  std::string out_dir = "runs/latest";
  int jobs = 1;
  SynthRunConfig synth;
  PretrainConfig pretrain;
  EncoderConfig encoder;  // n_classes 0 = derived from the corpus
  TrainConfig train;
  EvalRunConfig eval;
  SweepRunConfig sweep;

  // Re-derives every sub-seed from a global seed.
  void reseed(uint64_t global_seed);

  std::vector<SubsetSpec> subset_specs() const;
  EvalDataConfig eval_data_config() const;
  EvalSettings eval_settings() const;
  DistanceMetric metric_enum() const;

  std::string to_json_string() const;
  static RunConfig from_json_string(const std::string& json);
  void save(const std::string& path) const;
  static RunConfig load(const std::string& path);
};

// Reads the encoder parameters, normalization statistics and step count out
// of a training checkpoint without needing the training corpus.
struct CheckpointInfo {
  Parameters params;
  NormStats stats;
  int step = 0;
  TrainConfig train_config;
};

CheckpointInfo read_checkpoint(const std::string& path);

}  // namespace mixret

#endif  // MIXRET_RUN_CONFIG_H_
