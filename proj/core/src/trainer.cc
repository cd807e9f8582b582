// core/src/trainer.cc

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

#include "mixret/trainer.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "internal_json.h"

namespace mixret {

SnrPolicy SnrPolicy::fixed(double db) {
  SnrPolicy p;
  p.kind = Kind::kFixed;
  p.fixed_db = db;
  return p;
}

SnrPolicy SnrPolicy::uniform(double lo, double hi) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw InvalidParams("SnrPolicy::uniform: bounds must be finite with lo <= hi");
  SnrPolicy p;
  p.kind = Kind::kUniform;
  p.lo_db = lo;
  p.hi_db = hi;
  return p;
}

double SnrPolicy::draw(Rng& rng) const {
  if (kind == Kind::kFixed) return fixed_db;
  return rng.uniform(lo_db, hi_db);
}

std::string SnrPolicy::describe() const {
  auto fmt = [](double v) {
    char buf[32];
    if (v == static_cast<long>(v))
      std::snprintf(buf, sizeof(buf), "%ld", static_cast<long>(v));
    else
      std::snprintf(buf, sizeof(buf), "%g", v);
    return std::string(buf);
  };
  if (kind == Kind::kFixed) return "SNR at " + fmt(fixed_db) + " dB";
  if (lo_db == -hi_db) return "SNR at +-" + fmt(hi_db) + " dB";
  return "SNR in [" + fmt(lo_db) + ", " + fmt(hi_db) + "] dB";
}

TrainConfig TrainConfig::desk_default() {
  TrainConfig c;
  c.steps = 2000;
  c.batch_size = 16;
  c.grad_accum = 1;
  return c;
}

double lr_at(int step, const TrainConfig& config) {
  if (step < 0) throw InvalidParams("lr_at: step must be >= 0");
  if (config.warmup_steps > 0 && step < config.warmup_steps)
    return config.lr * static_cast<double>(step) / config.warmup_steps;
  int total = config.steps - config.warmup_steps;
  if (total <= 0) return config.lr;
  double frac = static_cast<double>(step - config.warmup_steps) / total;
  if (frac > 1.0) frac = 1.0;
  return config.lr * 0.5 * (1.0 + std::cos(M_PI * frac));
}

WeightedSampler::WeightedSampler(const std::vector<int>& class_counts) {
  if (class_counts.empty()) throw EmptyClass("weighted_sampler: no classes");
  double total = 0.0;
  for (int c : class_counts) {
    if (c <= 0) throw EmptyClass("weighted_sampler: class with zero clips");
    total += 1.0 / c;
  }
  cdf_.reserve(class_counts.size());
  double acc = 0.0;
  for (int c : class_counts) {
    acc += (1.0 / c) / total;
    cdf_.push_back(acc);
  }
  cdf_.back() = 1.0;
}

int WeightedSampler::draw(Rng& rng) const {
  double u = rng.uniform();
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<int>(it - cdf_.begin());
}

void AdamW::init(size_t n) {
  m.assign(n, 0.0);
  v.assign(n, 0.0);
  t = 0;
}

void AdamW::update(std::vector<double>& params, const std::vector<double>& grad,
                   double lr, const TrainConfig& config) {
  if (params.size() != grad.size() || params.size() != m.size())
    throw ShapeMismatch("AdamW::update: size mismatch");
  ++t;
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, t);
  const double bc2 = 1.0 - std::pow(b2, t);
  for (size_t i = 0; i < params.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
    v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
    double mhat = m[i] / bc1;
    double vhat = v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + config.adam_eps);
    params[i] -= lr * config.weight_decay * params[i];  // decoupled decay
  }
}

// ---------------------------------------------------------------------------
// Trainer
// ---------------------------------------------------------------------------

namespace {

std::vector<int> machine_class_counts(const PretrainCorpus& corpus) {
  std::vector<int> counts(corpus.c_machines, 0);
  for (const PoolClip& c : corpus.machines) {
    if (c.class_index < 0 || c.class_index >= corpus.c_machines)
      throw InvalidParams("trainer: machine clip with out-of-range class");
    counts[c.class_index]++;
  }
  return counts;
}

}  // namespace

Trainer::Trainer(const PretrainCorpus& corpus, const EncoderConfig& encoder_config,
                 const TrainConfig& config)
    : corpus_(corpus),
      config_(config),
      student_(init_parameters(encoder_config)),
      stats_{},
      rng_(mix_seed(config.seed, 0x747261696e657221ull)),
      sampler_(machine_class_counts(corpus)) {
  if (corpus_.machines.empty() || corpus_.noises.empty())
    throw InvalidParams("trainer: corpus must contain machine and noise clips");
  if (encoder_config.n_classes != corpus_.n_classes())
    throw InvalidParams("trainer: encoder n_classes (" +
                        std::to_string(encoder_config.n_classes) +
                        ") must equal corpus C+N (" +
                        std::to_string(corpus_.n_classes()) + ")");
  if (config_.steps <= config_.warmup_steps)
    throw InvalidParams("trainer: steps must exceed warmup_steps");
  if (config_.batch_size < 1 || config_.grad_accum < 1)
    throw InvalidParams("trainer: batch_size and grad_accum must be >= 1");
  if (config_.loss_weights.alpha < 0.0 || config_.loss_weights.beta < 0.0 ||
      config_.loss_weights.alpha + config_.loss_weights.beta <= 0.0)
    throw InvalidParams("trainer: loss weights must be >= 0 with alpha+beta > 0");

  teacher_ = std::make_shared<TeacherHandle>(freeze_teacher(student_));
  opt_.init(student_.values.size());

  machine_by_class_.resize(corpus_.c_machines);
  for (size_t i = 0; i < corpus_.machines.size(); ++i)
    machine_by_class_[corpus_.machines[i].class_index].push_back(static_cast<int>(i));

  // Corpus-level normalization statistics over all clean machine and noise
  // clips; the waveform cache is filled during the same pass.
  std::vector<MelFeatures> feats;
  feats.reserve(corpus_.machines.size() + corpus_.noises.size());
  for (size_t i = 0; i < corpus_.machines.size(); ++i)
    feats.push_back(extract_logmel(machine_wave(static_cast<int>(i))));
  for (size_t i = 0; i < corpus_.noises.size(); ++i)
    feats.push_back(extract_logmel(noise_wave(static_cast<int>(i))));
  stats_ = fit_norm(feats);
  if (!config_.cache_waveforms) {
    machine_cache_.clear();
    noise_cache_.clear();
  }

  refill_noise_queue();
}

void Trainer::refill_noise_queue() {
  noise_queue_ = rng_.permutation(static_cast<int>(corpus_.noises.size()));
  noise_cursor_ = 0;
}

const Waveform& Trainer::machine_wave(int idx) {
  auto it = machine_cache_.find(idx);
  if (it != machine_cache_.end()) return it->second;
  return machine_cache_.emplace(idx, render_clip(corpus_.machines[idx])).first->second;
}

const Waveform& Trainer::noise_wave(int idx) {
  auto it = noise_cache_.find(idx);
  if (it != noise_cache_.end()) return it->second;
  return noise_cache_.emplace(idx, render_clip(corpus_.noises[idx])).first->second;
}

const Matrix& Trainer::teacher_embedding(bool is_machine, int idx) {
  auto& cache = is_machine ? teacher_machine_cache_ : teacher_noise_cache_;
  auto it = cache.find(idx);
  if (it != cache.end()) return it->second;
  const Waveform& w = is_machine ? machine_wave(idx) : noise_wave(idx);
  MelFeatures f = apply_norm(extract_logmel(w), stats_);
  FrameEmbedding e = teacher_->forward(f, align_layer());
  return cache.emplace(idx, std::move(e.values)).first->second;
}

int Trainer::align_layer() const {
  int layer = config_.align_layer > 0 ? config_.align_layer : student_.config.n_layers;
  if (layer > student_.config.n_layers)
    throw LayerOutOfRange("trainer: align_layer exceeds n_layers");
  return layer;
}

Trainer::DrawnSample Trainer::draw_sample() {
  DrawnSample s;
  int cls = sampler_.draw(rng_);
  const std::vector<int>& clips = machine_by_class_[cls];
  s.machine_idx = clips[rng_.uniform_int(0, static_cast<int>(clips.size()) - 1)];
  if (noise_cursor_ >= noise_queue_.size()) refill_noise_queue();
  s.noise_idx = noise_queue_[noise_cursor_++];
  s.snr_db = config_.snr_policy.draw(rng_);
  s.aug_seed = rng_.next_u64();
  return s;
}

SampleRecord Trainer::to_record(const DrawnSample& s) const {
  SampleRecord r;
  const PoolClip& m = corpus_.machines[s.machine_idx];
  const PoolClip& n = corpus_.noises[s.noise_idx];
  r.machine_clip_id = m.id;
  r.noise_clip_id = n.id;
  r.snr_db_drawn = s.snr_db;
  r.label = make_label(corpus_.c_machines, corpus_.n_noises,
                       {m.class_index, n.class_index});
  return r;
}

std::vector<SampleRecord> Trainer::draw_batch() {
  std::vector<SampleRecord> out;
  out.reserve(config_.batch_size);
  for (int i = 0; i < config_.batch_size; ++i) out.push_back(to_record(draw_sample()));
  return out;
}

void Trainer::accumulate_batch(const std::vector<DrawnSample>& batch,
                               std::vector<double>& grad_sum, StepStats& stats) {
  const LossWeights& w = config_.loss_weights;
  const int tap = align_layer();
  const bool align_final = tap == student_.config.n_layers;
  const bool use_teacher = w.beta > 0.0;

  // Serial prefill keeps cache mutation out of the parallel region and makes
  // teacher call counts deterministic.
  for (const DrawnSample& s : batch) {
    machine_wave(s.machine_idx);
    noise_wave(s.noise_idx);
    if (use_teacher) {
      teacher_embedding(true, s.machine_idx);
      teacher_embedding(false, s.noise_idx);
    }
  }

  const int n = static_cast<int>(batch.size());
  std::vector<std::vector<double>> grads(n);
  std::vector<double> tag_vals(n, 0.0), mix_vals(n, 0.0);

  parallel_for(n, config_.jobs, [&](int i) {
    const DrawnSample& s = batch[i];
    const PoolClip& mclip = corpus_.machines[s.machine_idx];
    const PoolClip& nclip = corpus_.noises[s.noise_idx];

    MixResult mixed =
        mix_at_snr_unitnoise(machine_cache_.at(s.machine_idx),
                             noise_cache_.at(s.noise_idx), s.snr_db);
    MelFeatures feats = apply_norm(extract_logmel(mixed.mixture), stats_);
    if (config_.use_spec_augment)
      feats = spec_augment(feats, s.aug_seed, config_.augment);

    ForwardCache cache = forward_cached(student_, feats);

    LabelVector label = make_label(corpus_.c_machines, corpus_.n_noises,
                                   {mclip.class_index, nclip.class_index});

    std::vector<double> grad_logits(cache.logits.size(), 0.0);
    double tag_val = 0.0;
    if (config_.objective == TrainObjective::kDenoise) {
      // machine-only slice; noise logits receive no gradient
      std::vector<double> mslice(cache.logits.begin(),
                                 cache.logits.begin() + corpus_.c_machines);
      LabelVector mlabel;
      mlabel.c_machines = corpus_.c_machines;
      mlabel.n_noises = 0;
      mlabel.values.assign(label.values.begin(),
                           label.values.begin() + corpus_.c_machines);
      BceResult bce = bce_multilabel(mslice, mlabel);
      tag_val = bce.value;
      for (int k = 0; k < corpus_.c_machines; ++k)
        grad_logits[k] = w.alpha * bce.grad_logits[k];
    } else {
      BceResult bce = bce_multilabel(cache.logits, label);
      tag_val = bce.value;
      for (size_t k = 0; k < grad_logits.size(); ++k)
        grad_logits[k] = w.alpha * bce.grad_logits[k];
    }

    double mix_val = 0.0;
    Matrix emb_grad;
    if (use_teacher) {
      const Matrix& tm = teacher_machine_cache_.at(s.machine_idx);
      const Matrix& tn = teacher_noise_cache_.at(s.noise_idx);
      FrameEmbedding target;
      target.values = Matrix(tm.rows, tm.cols);
      for (size_t j = 0; j < tm.data.size(); ++j)
        target.values.data[j] =
            w.lambda_mix * tm.data[j] + (1.0 - w.lambda_mix) * tn.data[j];
      FrameEmbedding student_emb;
      student_emb.values = cache.taps[tap];
      MseResult mse = mixture_mse(student_emb, target, config_.mse_reduce);
      mix_val = mse.value;
      emb_grad = std::move(mse.grad_student);
      for (double& g : emb_grad.data) g *= w.beta;
    }
    tag_vals[i] = tag_val;
    mix_vals[i] = mix_val;
    grads[i] = backward_with_head(student_, cache,
                                  align_final ? emb_grad : Matrix(),
                                  w.alpha > 0.0 ? grad_logits : std::vector<double>());
    if (use_teacher && !align_final) {
      std::vector<double> extra = backward_at_layer(student_, cache, emb_grad, tap);
      for (size_t j = 0; j < grads[i].size(); ++j) grads[i][j] += extra[j];
    }
  });

  // reduce in sample order for bit-exact determinism
  for (int i = 0; i < n; ++i) {
    for (size_t j = 0; j < grad_sum.size(); ++j) grad_sum[j] += grads[i][j];
    stats.loss_tagging += tag_vals[i];
    stats.loss_mixture += mix_vals[i];
  }
  if (!config_.cache_waveforms) {
    machine_cache_.clear();
    noise_cache_.clear();
  }
}

StepStats Trainer::step_once() {
  std::vector<double> grad_sum(student_.values.size(), 0.0);
  StepStats stats;
  std::vector<SampleRecord> records;
  for (int a = 0; a < config_.grad_accum; ++a) {
    std::vector<DrawnSample> batch;
    batch.reserve(config_.batch_size);
    for (int i = 0; i < config_.batch_size; ++i) batch.push_back(draw_sample());
    for (const DrawnSample& s : batch) records.push_back(to_record(s));
    accumulate_batch(batch, grad_sum, stats);
  }

  const double denom = static_cast<double>(config_.batch_size) * config_.grad_accum;
  for (double& g : grad_sum) g /= denom;
  stats.loss_tagging /= denom;
  stats.loss_mixture /= denom;
  stats.loss_total = combined_loss(stats.loss_tagging, stats.loss_mixture,
                                   config_.loss_weights);
  stats.step = step_;

  if (!std::isfinite(stats.loss_total)) {
    if (!diagnostic_dir_.empty()) {
      nlohmann::json diag = {{"step", step_},
                             {"loss_tagging", stats.loss_tagging},
                             {"loss_mixture", stats.loss_mixture},
                             {"param_hash", student_.hash()}};
      std::ofstream os(diagnostic_dir_ + "/nonfinite_loss.json");
      os << diag.dump(2) << "\n";
    }
    throw NonFiniteLoss("train_step: non-finite loss at step " + std::to_string(step_));
  }

  opt_.update(student_.values, grad_sum, lr_at(step_, config_), config_);
  ++step_;
  metrics_.push_back(stats);
  sample_log_.insert(sample_log_.end(), records.begin(), records.end());
  return stats;
}

StepStats Trainer::step_on_batch(const std::vector<SampleRecord>& batch) {
  std::vector<DrawnSample> drawn;
  drawn.reserve(batch.size());
  for (const SampleRecord& r : batch) {
    DrawnSample s;
    s.machine_idx = -1;
    s.noise_idx = -1;
    for (size_t i = 0; i < corpus_.machines.size(); ++i)
      if (corpus_.machines[i].id == r.machine_clip_id) s.machine_idx = static_cast<int>(i);
    for (size_t i = 0; i < corpus_.noises.size(); ++i)
      if (corpus_.noises[i].id == r.noise_clip_id) s.noise_idx = static_cast<int>(i);
    if (s.machine_idx < 0 || s.noise_idx < 0)
      throw InvalidParams("step_on_batch: unknown clip id in record");
    s.snr_db = r.snr_db_drawn;
    s.aug_seed = rng_.next_u64();
    drawn.push_back(s);
  }
  std::vector<double> grad_sum(student_.values.size(), 0.0);
  StepStats stats;
  accumulate_batch(drawn, grad_sum, stats);
  const double denom = static_cast<double>(drawn.size());
  for (double& g : grad_sum) g /= denom;
  stats.loss_tagging /= denom;
  stats.loss_mixture /= denom;
  stats.loss_total = combined_loss(stats.loss_tagging, stats.loss_mixture,
                                   config_.loss_weights);
  stats.step = step_;
  if (!std::isfinite(stats.loss_total))
    throw NonFiniteLoss("step_on_batch: non-finite loss");
  opt_.update(student_.values, grad_sum, lr_at(step_, config_), config_);
  ++step_;
  metrics_.push_back(stats);
  return stats;
}

void Trainer::run(const std::string& run_dir, int checkpoint_every) {
  namespace fs = std::filesystem;
  if (!run_dir.empty()) {
    fs::create_directories(run_dir);
    fs::create_directories(run_dir + "/checkpoints");
    diagnostic_dir_ = run_dir;
  }
  while (step_ < config_.steps) {
    step_once();
    if (!run_dir.empty() && checkpoint_every > 0 && step_ % checkpoint_every == 0)
      save_checkpoint(run_dir + "/checkpoints/step_" + std::to_string(step_) + ".bin");
  }
  if (!run_dir.empty()) {
    save_checkpoint(run_dir + "/checkpoints/step_" + std::to_string(step_) + ".bin");
    write_metrics_csv(metrics_, run_dir + "/metrics.csv");
    std::ofstream os(run_dir + "/samples.jsonl");
    for (const SampleRecord& r : sample_log_) {
      std::vector<int> set_bits;
      for (int k = 0; k < r.label.size(); ++k)
        if (r.label.values[k]) set_bits.push_back(k);
      nlohmann::json j = {{"machine_clip_id", r.machine_clip_id},
                          {"noise_clip_id", r.noise_clip_id},
                          {"label", set_bits},
                          {"snr_db_drawn", r.snr_db_drawn}};
      os << j.dump() << "\n";
    }
  }
}

void write_metrics_csv(const std::vector<StepStats>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoFailure("write_metrics_csv: cannot open " + path);
  os << "step,loss_total,loss_tagging,loss_mixture\n";
  char buf[160];
  for (const StepStats& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g\n", r.step, r.loss_total,
                  r.loss_tagging, r.loss_mixture);
    os << buf;
  }
}

// ---------------------------------------------------------------------------
// Checkpointing: header JSON + raw doubles (params, m, v), content-hashed.
// ---------------------------------------------------------------------------

void Trainer::save_checkpoint(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "mixret-checkpoint";
  j["version"] = 1;
  j["step"] = step_;
  j["encoder_config"] = internal::encoder_config_to_json(student_.config);
  j["train_config"] = internal::train_config_to_json(config_);
  j["norm_stats"] = {{"mean", stats_.mean}, {"std", stats_.std}};
  j["rng_state"] = rng_.state();
  j["noise_queue"] = noise_queue_;
  j["noise_cursor"] = noise_cursor_;
  j["opt_t"] = opt_.t;
  j["corpus_fingerprint"] = corpus_.fingerprint();
  j["n_params"] = student_.values.size();

  uint64_t payload_hash = fnv1a64(student_.values);
  payload_hash = fnv1a64(opt_.m.data(), opt_.m.size() * sizeof(double), payload_hash);
  payload_hash = fnv1a64(opt_.v.data(), opt_.v.size() * sizeof(double), payload_hash);
  j["payload_hash"] = payload_hash;

  std::string header = j.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("save_checkpoint: cannot open " + path);
  os.write("MRCK", 4);
  char version = 1;
  os.write(&version, 1);
  uint32_t len = static_cast<uint32_t>(header.size());
  os.write(reinterpret_cast<const char*>(&len), 4);
  os.write(header.data(), len);
  auto write_vec = [&os](const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  write_vec(student_.values);
  write_vec(opt_.m);
  write_vec(opt_.v);
  if (!os) throw IoFailure("save_checkpoint: short write to " + path);
}

Trainer Trainer::restore(const std::string& path, const PretrainCorpus& corpus) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("restore: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "MRCK", 4) != 0)
    throw CorruptCheckpoint("restore: bad magic in " + path);
  char version = 0;
  is.read(&version, 1);
  if (version != 1) throw CorruptCheckpoint("restore: unknown version");
  uint32_t len = 0;
  is.read(reinterpret_cast<char*>(&len), 4);
  std::string header(len, '\0');
  is.read(header.data(), len);
  if (!is) throw CorruptCheckpoint("restore: truncated header");
  nlohmann::json j = nlohmann::json::parse(header, nullptr, false);
  if (j.is_discarded()) throw CorruptCheckpoint("restore: bad header JSON");

  if (j.at("corpus_fingerprint").get<uint64_t>() != corpus.fingerprint())
    throw CorruptCheckpoint("restore: checkpoint was trained on a different corpus");

  EncoderConfig enc = internal::encoder_config_from_json(j.at("encoder_config"));
  TrainConfig cfg = internal::train_config_from_json(j.at("train_config"));
  Trainer t(corpus, enc, cfg);

  size_t n = j.at("n_params").get<size_t>();
  if (n != t.student_.values.size())
    throw CorruptCheckpoint("restore: parameter count mismatch");
  auto read_vec = [&is](std::vector<double>& v) {
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  read_vec(t.student_.values);
  t.opt_.init(n);
  read_vec(t.opt_.m);
  read_vec(t.opt_.v);
  if (!is) throw CorruptCheckpoint("restore: truncated payload");

  uint64_t payload_hash = fnv1a64(t.student_.values);
  payload_hash = fnv1a64(t.opt_.m.data(), t.opt_.m.size() * sizeof(double), payload_hash);
  payload_hash = fnv1a64(t.opt_.v.data(), t.opt_.v.size() * sizeof(double), payload_hash);
  if (payload_hash != j.at("payload_hash").get<uint64_t>())
    throw CorruptCheckpoint("restore: content hash mismatch");

  t.step_ = j.at("step").get<int>();
  t.opt_.t = j.at("opt_t").get<int>();
  t.stats_.mean = j.at("norm_stats").at("mean").get<double>();
  t.stats_.std = j.at("norm_stats").at("std").get<double>();
  t.rng_.set_state(j.at("rng_state").get<std::string>());
  t.noise_queue_ = j.at("noise_queue").get<std::vector<int>>();
  t.noise_cursor_ = j.at("noise_cursor").get<size_t>();
  // teacher caches were computed before any update, so rebuilding them from
  // the frozen copy reproduces the original values exactly
  return t;
}

}  // namespace mixret
