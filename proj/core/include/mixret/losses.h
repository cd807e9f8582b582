// core/include/mixret/losses.h

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

#ifndef MIXRET_LOSSES_H_
#define MIXRET_LOSSES_H_

#include <cstdint>
#include <vector>

#include "mixret/encoder.h"
#include "mixret/wave.h"

namespace mixret {

// Multi-hot target over C machine-attribute classes followed by N noise
// classes. The machine-only slice [0, C) serves the denoising objective.
struct LabelVector {
  std::vector<uint8_t> values;
  int c_machines = 0;
  int n_noises = 0;

  int size() const { return static_cast<int>(values.size()); }
  bool any_set() const;
};

LabelVector make_label(int c_machines, int n_noises, std::vector<int> set_indices);

struct LossWeights {
  double alpha = 1.0;       // tagging weight
  double beta = 1.0;        // mixture-alignment weight
  double lambda_mix = 0.5;  // convex combination weight for the teacher target
};

struct BceResult {
  double value = 0.0;
  std::vector<double> grad_logits;  // sigmoid(z) - y
};

// Multi-label binary cross-entropy in logit space (log-sum-exp stable; the
// sigmoid is never materialised inside a log). Throws LengthMismatch.
BceResult bce_multilabel(const std::vector<double>& logits, const LabelVector& target);

// lambda*e_target + (1-lambda)*e_noise elementwise. Throws ShapeMismatch /
// LambdaOutOfRange.
FrameEmbedding convex_teacher_target(const FrameEmbedding& e_target,
                                     const FrameEmbedding& e_noise, double lambda);

enum class MseReduce { kSum, kMean };

struct MseResult {
  double value = 0.0;
  Matrix grad_student;
};

// Squared L2 distance between the student and teacher embedding grids.
// Default reduction sums over all L*D entries; kMean divides value and
// gradient by L*D.
MseResult mixture_mse(const FrameEmbedding& f_student, const FrameEmbedding& f_teacher,
                      MseReduce reduce = MseReduce::kSum);

// alpha*tagging + beta*mixture.
double combined_loss(double tagging_value, double mixture_value, const LossWeights& w);

struct LinearMixupResult {
  MelFeatures features;
  std::vector<double> soft_targets;
  double gamma = 0.0;
};

// gamma ~ Beta(beta_ab, beta_ab); returns gamma*f1 + (1-gamma)*f2 and the
// matching soft targets.
LinearMixupResult linear_mixup(const MelFeatures& f1, const LabelVector& y1,
                               const MelFeatures& f2, const LabelVector& y2,
                               double beta_ab, Rng& rng);

struct SnrMixupResult {
  MixResult mix;
  LabelVector target;  // elementwise OR of the inputs (hard labels)
};

// SNR mixup: unit-noise-power mixing of the raw waveforms with hard labels.
SnrMixupResult snr_mixup(const Waveform& x1, const LabelVector& y1,
                         const Waveform& x2, const LabelVector& y2, double snr_db);

// Beta(a, a) sampler used by linear_mixup; exposed for statistical tests.
double sample_beta(double a, Rng& rng);

}  // namespace mixret

#endif  // MIXRET_LOSSES_H_
