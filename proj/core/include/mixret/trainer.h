// core/include/mixret/trainer.h

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

#ifndef MIXRET_TRAINER_H_
#define MIXRET_TRAINER_H_

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mixret/corpus.h"
#include "mixret/encoder.h"
#include "mixret/losses.h"
#include "mixret/spec_augment.h"

namespace mixret {

struct SnrPolicy {
  enum class Kind { kFixed, kUniform };
  Kind kind = Kind::kUniform;
  double fixed_db = 0.0;
  double lo_db = -5.0;
  double hi_db = 5.0;

  static SnrPolicy fixed(double db);
  static SnrPolicy uniform(double lo, double hi);
  double draw(Rng& rng) const;
  std::string describe() const;  // "SNR at 0 dB", "SNR at +-5 dB"
};

// kRetainTagging: BCE over all C+N labels (machine + noise retained).
// kDenoise: BCE over the machine slice only; noise labels are discarded.
enum class TrainObjective { kRetainTagging, kDenoise };

struct TrainConfig {
  int steps = 20000;
  int batch_size = 64;
  int grad_accum = 2;
  double lr = 1e-4;
  double weight_decay = 1e-3;
  int warmup_steps = 200;
  SnrPolicy snr_policy;                // uniform(-5, 5) unless noted
  LossWeights loss_weights;
  TrainObjective objective = TrainObjective::kRetainTagging;
  MseReduce mse_reduce = MseReduce::kSum;
  int align_layer = 0;  // block whose student/teacher taps are aligned; 0 = final
  SpecAugmentConfig augment;
  bool use_spec_augment = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 0;
  int jobs = 1;
  bool cache_waveforms = true;

  // Small configuration that trains in minutes on one CPU core.
  static TrainConfig desk_default();
};

// Linear warmup to lr over warmup_steps, then cosine decay to zero at the
// final step.
double lr_at(int step, const TrainConfig& config);

// Class-balanced sampling: class k drawn with probability proportional to
// 1/count_k. Throws EmptyClass when any count is zero.
class WeightedSampler {
 public:
  explicit WeightedSampler(const std::vector<int>& class_counts);
  int draw(Rng& rng) const;
  int n_classes() const { return static_cast<int>(cdf_.size()); }

 private:
  std::vector<double> cdf_;
};

struct SampleRecord {
  std::string machine_clip_id;
  std::string noise_clip_id;
  LabelVector label;
  double snr_db_drawn = 0.0;
};

// Adam with decoupled weight decay. With beta1 = beta2 = 0 and no decay the
// update direction degenerates to -g/(|g| + eps).
struct AdamW {
  std::vector<double> m;
  std::vector<double> v;
  int t = 0;

  void init(size_t n);
  void update(std::vector<double>& params, const std::vector<double>& grad,
              double lr, const TrainConfig& config);
};

struct StepStats {
  int step = 0;
  double loss_total = 0.0;
  double loss_tagging = 0.0;
  double loss_mixture = 0.0;
};

// Pre-training loop: draws class-balanced machine clips, pairs them with
// noise clips consumed without replacement per pass, mixes at the policy SNR
// (unit-noise-power convention), SpecAugments the mixture features only, and
// optimizes alpha*tagging + beta*mixture against a frozen teacher.
class Trainer {
 public:
  Trainer(const PretrainCorpus& corpus, const EncoderConfig& encoder_config,
          const TrainConfig& config);

  // One optimizer step: grad_accum micro-batches, summed then divided by the
  // accumulation count. Throws NonFiniteLoss with a diagnostic dump path.
  StepStats step_once();

  // Fixed-batch variant used by overfit checks: repeatedly steps on the same
  // drawn batch.
  StepStats step_on_batch(const std::vector<SampleRecord>& batch);

  // Runs until config.steps, appending metrics rows; optional run directory
  // receives metrics.csv, samples.jsonl and a final checkpoint.
  void run(const std::string& run_dir = "", int checkpoint_every = 0);

  std::vector<SampleRecord> draw_batch();

  void save_checkpoint(const std::string& path) const;
  static Trainer restore(const std::string& path, const PretrainCorpus& corpus);

  const Parameters& student() const { return student_; }
  const TeacherHandle& teacher() const { return *teacher_; }
  const NormStats& norm_stats() const { return stats_; }
  const TrainConfig& config() const { return config_; }
  int step() const { return step_; }
  const std::vector<StepStats>& metrics() const { return metrics_; }
  const std::vector<SampleRecord>& sample_log() const { return sample_log_; }

 private:
  struct DrawnSample {
    int machine_idx;
    int noise_idx;
    double snr_db;
    uint64_t aug_seed;
  };

  DrawnSample draw_sample();
  SampleRecord to_record(const DrawnSample& s) const;
  int align_layer() const;
  const Waveform& machine_wave(int idx);
  const Waveform& noise_wave(int idx);
  const Matrix& teacher_embedding(bool is_machine, int idx);
  void accumulate_batch(const std::vector<DrawnSample>& batch,
                        std::vector<double>& grad_sum, StepStats& stats);
  void refill_noise_queue();

  PretrainCorpus corpus_;
  TrainConfig config_;
  Parameters student_;
  std::shared_ptr<TeacherHandle> teacher_;
  AdamW opt_;
  NormStats stats_;
  Rng rng_;
  int step_ = 0;
  WeightedSampler sampler_;
  std::vector<std::vector<int>> machine_by_class_;
  std::vector<int> noise_queue_;
  size_t noise_cursor_ = 0;
  std::vector<StepStats> metrics_;
  std::vector<SampleRecord> sample_log_;
  std::string diagnostic_dir_;

  // caches (deterministically reconstructible; never checkpointed)
  std::unordered_map<int, Waveform> machine_cache_;
  std::unordered_map<int, Waveform> noise_cache_;
  std::unordered_map<int, Matrix> teacher_machine_cache_;
  std::unordered_map<int, Matrix> teacher_noise_cache_;
};

void write_metrics_csv(const std::vector<StepStats>& rows, const std::string& path);

}  // namespace mixret

#endif  // MIXRET_TRAINER_H_
