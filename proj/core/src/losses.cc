// core/src/losses.cc

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

#include "mixret/losses.h"

#include <cmath>

namespace mixret {

bool LabelVector::any_set() const {
  for (uint8_t v : values)
    if (v) return true;
  return false;
}

LabelVector make_label(int c_machines, int n_noises, std::vector<int> set_indices) {
  LabelVector y;
  y.c_machines = c_machines;
  y.n_noises = n_noises;
  y.values.assign(c_machines + n_noises, 0);
  for (int i : set_indices) y.values.at(i) = 1;
  return y;
}

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

BceResult bce_multilabel(const std::vector<double>& logits, const LabelVector& target) {
  if (static_cast<int>(logits.size()) != target.size())
    throw LengthMismatch("bce_multilabel: logits/target length mismatch");
  BceResult out;
  out.grad_logits.resize(logits.size());
  long double acc = 0.0L;
  for (size_t k = 0; k < logits.size(); ++k) {
    double z = logits[k];
    double y = target.values[k] ? 1.0 : 0.0;
    // -[y log s(z) + (1-y) log(1-s(z))] = y*softplus(-z) + (1-y)*softplus(z)
    acc += y * softplus(-z) + (1.0 - y) * softplus(z);
    out.grad_logits[k] = sigmoid(z) - y;
  }
  out.value = static_cast<double>(acc);
  return out;
}

FrameEmbedding convex_teacher_target(const FrameEmbedding& e_target,
                                     const FrameEmbedding& e_noise, double lambda) {
  if (!e_target.values.same_shape(e_noise.values))
    throw ShapeMismatch("convex_teacher_target: embedding shapes differ");
  if (lambda < 0.0 || lambda > 1.0)
    throw LambdaOutOfRange("convex_teacher_target: lambda must be in [0, 1]");
  FrameEmbedding out = e_target;
  for (size_t i = 0; i < out.values.data.size(); ++i)
    out.values.data[i] = lambda * e_target.values.data[i] +
                         (1.0 - lambda) * e_noise.values.data[i];
  return out;
}

MseResult mixture_mse(const FrameEmbedding& f_student, const FrameEmbedding& f_teacher,
                      MseReduce reduce) {
  if (!f_student.values.same_shape(f_teacher.values))
    throw ShapeMismatch("mixture_mse: embedding shapes differ");
  MseResult out;
  out.grad_student = Matrix(f_student.values.rows, f_student.values.cols);
  const double scale =
      reduce == MseReduce::kMean ? 1.0 / static_cast<double>(f_student.values.size()) : 1.0;
  long double acc = 0.0L;
  for (size_t i = 0; i < f_student.values.data.size(); ++i) {
    double d = f_student.values.data[i] - f_teacher.values.data[i];
    acc += static_cast<long double>(d) * d;
    out.grad_student.data[i] = 2.0 * d * scale;
  }
  out.value = static_cast<double>(acc) * scale;
  return out;
}

double combined_loss(double tagging_value, double mixture_value, const LossWeights& w) {
  return w.alpha * tagging_value + w.beta * mixture_value;
}

// Marsaglia-Tsang gamma sampler; the a < 1 case boosts through Gamma(a+1).
static double sample_gamma(double a, Rng& rng) {
  if (a < 1.0) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    return sample_gamma(a + 1.0, rng) * std::pow(u, 1.0 / a);
  }
  double d = a - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = rng.gaussian();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

double sample_beta(double a, Rng& rng) {
  if (a <= 0.0) throw InvalidParams("sample_beta: a must be > 0");
  double x = sample_gamma(a, rng);
  double y = sample_gamma(a, rng);
  return x / (x + y);
}

LinearMixupResult linear_mixup(const MelFeatures& f1, const LabelVector& y1,
                               const MelFeatures& f2, const LabelVector& y2,
                               double beta_ab, Rng& rng) {
  if (!f1.values.same_shape(f2.values))
    throw ShapeMismatch("linear_mixup: feature shapes differ");
  if (y1.size() != y2.size()) throw ShapeMismatch("linear_mixup: label lengths differ");
  LinearMixupResult out;
  out.gamma = sample_beta(beta_ab, rng);
  out.features = f1;
  for (size_t i = 0; i < out.features.values.data.size(); ++i)
    out.features.values.data[i] =
        out.gamma * f1.values.data[i] + (1.0 - out.gamma) * f2.values.data[i];
  out.soft_targets.resize(y1.size());
  for (int k = 0; k < y1.size(); ++k)
    out.soft_targets[k] = out.gamma * y1.values[k] + (1.0 - out.gamma) * y2.values[k];
  return out;
}

SnrMixupResult snr_mixup(const Waveform& x1, const LabelVector& y1,
                         const Waveform& x2, const LabelVector& y2, double snr_db) {
  if (y1.size() != y2.size()) throw ShapeMismatch("snr_mixup: label lengths differ");
  SnrMixupResult out;
  out.mix = mix_at_snr_unitnoise(x1, x2, snr_db);
  out.target = y1;
  for (int k = 0; k < y1.size(); ++k)
    out.target.values[k] = (y1.values[k] || y2.values[k]) ? 1 : 0;
  return out;
}

}  // namespace mixret
