// core/src/run_config.cc

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

#include "mixret/run_config.h"

#include <cstring>
#include <fstream>

#include "json.hpp"
#include "internal_json.h"

namespace mixret {

void RunConfig::reseed(uint64_t global_seed) {
  seed = global_seed;
  pretrain.seed = mix_seed(global_seed, hash_string("pretrain"));
  encoder.seed = mix_seed(global_seed, hash_string("encoder"));
  train.seed = mix_seed(global_seed, hash_string("train"));
}

std::vector<SubsetSpec> RunConfig::subset_specs() const {
  std::vector<SubsetSpec> specs;
  for (const std::string& name : synth.subsets) {
    SubsetSpec spec = SubsetSpec::for_name(subset_from_string(name), synth.snr_grid);
    spec.counts = synth.counts;
    specs.push_back(std::move(spec));
  }
  return specs;
}

EvalDataConfig RunConfig::eval_data_config() const {
  EvalDataConfig c;
  c.duration_s = synth.duration_s;
  c.anomaly_severity = synth.anomaly_severity;
  c.seed = mix_seed(seed, hash_string("evaldata"));
  return c;
}

DistanceMetric RunConfig::metric_enum() const {
  if (eval.metric == "euclidean") return DistanceMetric::kEuclidean;
  if (eval.metric == "cosine") return DistanceMetric::kCosineDistance;
  throw ConfigError("unknown distance metric: " + eval.metric);
}

EvalSettings RunConfig::eval_settings() const {
  EvalSettings s;
  s.layer = eval.layer;
  s.k = eval.k;
  s.metric = metric_enum();
  s.pauc_p = eval.pauc_p;
  s.oracle_lambda = eval.oracle_lambda;
  s.jobs = jobs;
  return s;
}

std::string RunConfig::to_json_string() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["jobs"] = jobs;
  j["synth"] = {{"subsets", synth.subsets},
                {"snr_grid", synth.snr_grid},
                {"counts",
                 {{"ref_source", synth.counts.ref_source},
                  {"ref_target", synth.counts.ref_target},
                  {"test_source_normal", synth.counts.test_source_normal},
                  {"test_source_anomalous", synth.counts.test_source_anomalous},
                  {"test_target_normal", synth.counts.test_target_normal},
                  {"test_target_anomalous", synth.counts.test_target_anomalous}}},
                {"duration_s", synth.duration_s},
                {"anomaly_severity", synth.anomaly_severity}};
  j["pretrain"] = {{"machine_families", pretrain.machine_families},
                   {"attributes_per_family", pretrain.attributes_per_family},
                   {"clips_per_class", pretrain.clips_per_class},
                   {"clips_per_noise_class", pretrain.clips_per_noise_class},
                   {"duration_s", pretrain.duration_s},
                   {"seed", pretrain.seed}};
  j["encoder"] = internal::encoder_config_to_json(encoder);
  j["train"] = internal::train_config_to_json(train);
  j["eval"] = {{"layer", eval.layer},
               {"k", eval.k},
               {"metric", eval.metric},
               {"pauc_p", eval.pauc_p},
               {"oracle_lambda", eval.oracle_lambda}};
  j["sweep"] = {{"axis", sweep.axis}, {"grid", sweep.grid}};
  return j.dump(2);
}

RunConfig RunConfig::from_json_string(const std::string& json) {
  nlohmann::json j = nlohmann::json::parse(json, nullptr, false);
  if (j.is_discarded()) throw ConfigError("RunConfig: invalid JSON");
  RunConfig c;
  c.seed = j.value("seed", c.seed);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.jobs = j.value("jobs", c.jobs);
  if (j.contains("synth")) {
    const nlohmann::json& s = j.at("synth");
    c.synth.subsets = s.value("subsets", c.synth.subsets);
    c.synth.snr_grid = s.value("snr_grid", c.synth.snr_grid);
    if (s.contains("counts")) {
      const nlohmann::json& k = s.at("counts");
      c.synth.counts.ref_source = k.value("ref_source", c.synth.counts.ref_source);
      c.synth.counts.ref_target = k.value("ref_target", c.synth.counts.ref_target);
      c.synth.counts.test_source_normal =
          k.value("test_source_normal", c.synth.counts.test_source_normal);
      c.synth.counts.test_source_anomalous =
          k.value("test_source_anomalous", c.synth.counts.test_source_anomalous);
      c.synth.counts.test_target_normal =
          k.value("test_target_normal", c.synth.counts.test_target_normal);
      c.synth.counts.test_target_anomalous =
          k.value("test_target_anomalous", c.synth.counts.test_target_anomalous);
    }
    c.synth.duration_s = s.value("duration_s", c.synth.duration_s);
    c.synth.anomaly_severity = s.value("anomaly_severity", c.synth.anomaly_severity);
  }
  if (j.contains("pretrain")) {
    const nlohmann::json& p = j.at("pretrain");
    c.pretrain.machine_families = p.value("machine_families", c.pretrain.machine_families);
    c.pretrain.attributes_per_family =
        p.value("attributes_per_family", c.pretrain.attributes_per_family);
    c.pretrain.clips_per_class = p.value("clips_per_class", c.pretrain.clips_per_class);
    c.pretrain.clips_per_noise_class =
        p.value("clips_per_noise_class", c.pretrain.clips_per_noise_class);
    c.pretrain.duration_s = p.value("duration_s", c.pretrain.duration_s);
    c.pretrain.seed = p.value("seed", c.pretrain.seed);
  }
  if (j.contains("encoder")) c.encoder = internal::encoder_config_from_json(j.at("encoder"));
  if (j.contains("train")) c.train = internal::train_config_from_json(j.at("train"));
  if (j.contains("eval")) {
    const nlohmann::json& e = j.at("eval");
    c.eval.layer = e.value("layer", c.eval.layer);
    c.eval.k = e.value("k", c.eval.k);
    c.eval.metric = e.value("metric", c.eval.metric);
    c.eval.pauc_p = e.value("pauc_p", c.eval.pauc_p);
    c.eval.oracle_lambda = e.value("oracle_lambda", c.eval.oracle_lambda);
  }
  if (j.contains("sweep")) {
    const nlohmann::json& s = j.at("sweep");
    c.sweep.axis = s.value("axis", c.sweep.axis);
    c.sweep.grid = s.value("grid", c.sweep.grid);
  }
  return c;
}

void RunConfig::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoFailure("RunConfig::save: cannot open " + path);
  os << to_json_string() << "\n";
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("RunConfig::load: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

CheckpointInfo read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("read_checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "MRCK", 4) != 0)
    throw CorruptCheckpoint("read_checkpoint: bad magic in " + path);
  char version = 0;
  is.read(&version, 1);
  if (version != 1) throw CorruptCheckpoint("read_checkpoint: unknown version");
  uint32_t len = 0;
  is.read(reinterpret_cast<char*>(&len), 4);
  std::string header(len, '\0');
  is.read(header.data(), len);
  if (!is) throw CorruptCheckpoint("read_checkpoint: truncated header");
  nlohmann::json j = nlohmann::json::parse(header, nullptr, false);
  if (j.is_discarded()) throw CorruptCheckpoint("read_checkpoint: bad header JSON");

  CheckpointInfo info;
  info.params.config = internal::encoder_config_from_json(j.at("encoder_config"));
  info.train_config = internal::train_config_from_json(j.at("train_config"));
  info.step = j.at("step").get<int>();
  info.stats.mean = j.at("norm_stats").at("mean").get<double>();
  info.stats.std = j.at("norm_stats").at("std").get<double>();
  size_t n = j.at("n_params").get<size_t>();
  ParameterLayout layout = layout_for(info.params.config);
  if (n != layout.total_size)
    throw CorruptCheckpoint("read_checkpoint: parameter count mismatch");
  info.params.values.resize(n);
  is.read(reinterpret_cast<char*>(info.params.values.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw CorruptCheckpoint("read_checkpoint: truncated payload");
  return info;
}

}  // namespace mixret
