// core/src/internal_json.h

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

// JSON helpers shared between translation units. Not installed; public
// headers stay free of the vendored JSON dependency.

#ifndef MIXRET_SRC_INTERNAL_JSON_H_
#define MIXRET_SRC_INTERNAL_JSON_H_

#include "json.hpp"
#include "mixret/encoder.h"
#include "mixret/trainer.h"

namespace mixret::internal {

inline nlohmann::json encoder_config_to_json(const EncoderConfig& c) {
  return {{"patch_t", c.patch_t}, {"patch_f", c.patch_f}, {"d_model", c.d_model},
          {"n_layers", c.n_layers}, {"n_classes", c.n_classes}, {"seed", c.seed}};
}

inline EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.patch_t = j.at("patch_t").get<int>();
  c.patch_f = j.at("patch_f").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.n_layers = j.at("n_layers").get<int>();
  c.n_classes = j.at("n_classes").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

inline nlohmann::json snr_policy_to_json(const SnrPolicy& p) {
  if (p.kind == SnrPolicy::Kind::kFixed)
    return {{"kind", "fixed"}, {"db", p.fixed_db}};
  return {{"kind", "uniform"}, {"lo", p.lo_db}, {"hi", p.hi_db}};
}

inline SnrPolicy snr_policy_from_json(const nlohmann::json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "fixed") return SnrPolicy::fixed(j.at("db").get<double>());
  if (kind == "uniform")
    return SnrPolicy::uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
  throw ConfigError("unknown snr policy kind: " + kind);
}

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {{"steps", c.steps},
          {"batch_size", c.batch_size},
          {"grad_accum", c.grad_accum},
          {"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"warmup_steps", c.warmup_steps},
          {"snr_policy", snr_policy_to_json(c.snr_policy)},
          {"alpha", c.loss_weights.alpha},
          {"beta", c.loss_weights.beta},
          {"lambda_mix", c.loss_weights.lambda_mix},
          {"objective", c.objective == TrainObjective::kDenoise ? "denoise" : "retain_tagging"},
          {"mse_reduce", c.mse_reduce == MseReduce::kMean ? "mean" : "sum"},
          {"align_layer", c.align_layer},
          {"augment",
           {{"n_time_masks", c.augment.n_time_masks},
            {"max_time_width", c.augment.max_time_width},
            {"n_freq_masks", c.augment.n_freq_masks},
            {"max_freq_width", c.augment.max_freq_width}}},
          {"use_spec_augment", c.use_spec_augment},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"seed", c.seed},
          {"jobs", c.jobs},
          {"cache_waveforms", c.cache_waveforms}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.steps = j.value("steps", c.steps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.grad_accum = j.value("grad_accum", c.grad_accum);
  c.lr = j.value("lr", c.lr);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
  if (j.contains("snr_policy")) c.snr_policy = snr_policy_from_json(j.at("snr_policy"));
  c.loss_weights.alpha = j.value("alpha", c.loss_weights.alpha);
  c.loss_weights.beta = j.value("beta", c.loss_weights.beta);
  c.loss_weights.lambda_mix = j.value("lambda_mix", c.loss_weights.lambda_mix);
  std::string obj = j.value("objective", std::string("retain_tagging"));
  c.objective = obj == "denoise" ? TrainObjective::kDenoise : TrainObjective::kRetainTagging;
  c.mse_reduce = j.value("mse_reduce", std::string("sum")) == "mean" ? MseReduce::kMean
                                                                     : MseReduce::kSum;
  c.align_layer = j.value("align_layer", c.align_layer);
  if (j.contains("augment")) {
    const nlohmann::json& a = j.at("augment");
    c.augment.n_time_masks = a.value("n_time_masks", c.augment.n_time_masks);
    c.augment.max_time_width = a.value("max_time_width", c.augment.max_time_width);
    c.augment.n_freq_masks = a.value("n_freq_masks", c.augment.n_freq_masks);
    c.augment.max_freq_width = a.value("max_freq_width", c.augment.max_freq_width);
  }
  c.use_spec_augment = j.value("use_spec_augment", c.use_spec_augment);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.seed = j.value("seed", c.seed);
  c.jobs = j.value("jobs", c.jobs);
  c.cache_waveforms = j.value("cache_waveforms", c.cache_waveforms);
  return c;
}

}  // namespace mixret::internal

#endif  // MIXRET_SRC_INTERNAL_JSON_H_
