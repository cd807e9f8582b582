// core/include/mixret/encoder.h

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

#ifndef MIXRET_ENCODER_H_
#define MIXRET_ENCODER_H_

#include <atomic>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mixret/logmel.h"

namespace mixret {

// A small trainable patch encoder: the input spectrogram is cut into
// patch_t x patch_f patches (zero-padded at the tail so T is deterministic),
// each patch is linearly projected to d_model, and n_layers residual blocks
// (linear -> tanh -> linear, residual add) refine the L x D embedding grid.
// Every block output can be tapped. A linear head over the L-mean of the
// final tap produces multi-label logits.
//
// The architecture is deliberately plain so its gradients stay exactly
// verifiable; an attention block would slot in as another block type.
struct EncoderConfig {
  int patch_t = 16;    // frames per patch
  int patch_f = 16;    // mel bins per patch
  int d_model = 64;    // embedding dim D
  int n_layers = 6;    // residual blocks
  int n_classes = 0;   // linear head width (C+N); 0 = no head
  uint64_t seed = 0;

  // Default tap for scoring: middle block, mirroring the mid-layer choice
  // used for 12-layer backbones.
  int default_tap() const { return n_layers / 2 > 0 ? n_layers / 2 : 1; }
};

bool operator==(const EncoderConfig& a, const EncoderConfig& b);

struct TensorSpec {
  std::string name;
  int rows = 0;
  int cols = 0;      // 1 for bias vectors
  size_t offset = 0;
  size_t size() const { return static_cast<size_t>(rows) * cols; }
};

// Per-tensor layout of the flat parameter vector; offsets partition it
// exactly.
struct ParameterLayout {
  std::vector<TensorSpec> tensors;
  size_t total_size = 0;
  const TensorSpec& find(const std::string& name) const;
};

ParameterLayout layout_for(const EncoderConfig& config);

struct Parameters {
  EncoderConfig config;
  std::vector<double> values;

  uint64_t hash() const { return fnv1a64(values); }
};

// Deterministic per config.seed: weights uniform in
// +/- sqrt(6/(fan_in+fan_out)), biases zero.
Parameters init_parameters(const EncoderConfig& config);

// Binary blob + JSON layout table, verified by content hash on load.
void save_parameters(const Parameters& params, const std::string& path);
Parameters load_parameters(const std::string& path);

struct FrameEmbedding {
  Matrix values;      // L x D
  int t_patches = 0;  // T
  int f_patches = 0;  // F; L = T*F, rows ordered row-major over (t, f)
  int layer_index = 0;
};

// Tap at block `layer`, layer in [1, n_layers]. Throws LayerOutOfRange.
FrameEmbedding forward(const Parameters& params, const MelFeatures& features, int layer);

// Final-layer embedding plus head logits (sigmoid is applied downstream in
// the losses, never here).
std::pair<FrameEmbedding, std::vector<double>> forward_with_head(
    const Parameters& params, const MelFeatures& features);

// Activations retained for the reverse pass.
struct ForwardCache {
  Matrix patches;             // L x (patch_t*patch_f)
  int t_patches = 0, f_patches = 0;
  std::vector<Matrix> taps;   // taps[k] = output of block k; taps[0] = projection
  std::vector<Matrix> tanh_u; // per block, tanh of the first linear's output
  std::vector<double> pooled; // mean over L of the final tap
  std::vector<double> logits; // empty when n_classes == 0
};

ForwardCache forward_cached(const Parameters& params, const MelFeatures& features);

// Gradient of <upstream, tap(layer)> with respect to the parameters.
// upstream must match the tap shape (ShapeMismatch otherwise).
std::vector<double> backward(const Parameters& params, const MelFeatures& features,
                             const Matrix& upstream, int layer);

// Combined reverse pass: grad_final_embedding enters at the last tap,
// grad_logits through the head. Either may be empty (treated as zero).
std::vector<double> backward_with_head(const Parameters& params,
                                       const ForwardCache& cache,
                                       const Matrix& grad_final_embedding,
                                       const std::vector<double>& grad_logits);

// Reverse pass from an arbitrary tap, reusing a full forward cache.
std::vector<double> backward_at_layer(const Parameters& params,
                                      const ForwardCache& cache,
                                      const Matrix& upstream, int layer);

// Frozen deep copy of the parameters. No update path exists; forward calls
// are counted so tests can assert the teacher is never consulted when the
// alignment weight is zero.
class TeacherHandle {
 public:
  explicit TeacherHandle(const Parameters& params)
      : params_(params), hash_at_freeze_(params.hash()) {}
  TeacherHandle(const TeacherHandle& o)
      : params_(o.params_), hash_at_freeze_(o.hash_at_freeze_),
        calls_(o.calls_.load()) {}

  FrameEmbedding forward(const MelFeatures& features, int layer) const {
    calls_.fetch_add(1);
    return mixret::forward(params_, features, layer);
  }

  const Parameters& params() const { return params_; }
  uint64_t hash_at_freeze() const { return hash_at_freeze_; }
  uint64_t current_hash() const { return params_.hash(); }
  long forward_calls() const { return calls_.load(); }

 private:
  Parameters params_;
  uint64_t hash_at_freeze_;
  mutable std::atomic<long> calls_{0};
};

TeacherHandle freeze_teacher(const Parameters& params);

}  // namespace mixret

#endif  // MIXRET_ENCODER_H_
