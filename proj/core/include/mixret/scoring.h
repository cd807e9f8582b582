// core/include/mixret/scoring.h

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

#ifndef MIXRET_SCORING_H_
#define MIXRET_SCORING_H_

#include <string>
#include <vector>

#include "mixret/encoder.h"
#include "mixret/losses.h"

namespace mixret {

// Frame embeddings mean-pooled along T and flattened: out[f*D + d] is the
// T-mean of grid entry ((t, f), d).
struct PooledEmbedding {
  std::vector<double> values;  // length f_patches * D
  int source_layer = 0;
};

PooledEmbedding pool(const FrameEmbedding& e);

enum class Domain { kSource, kTarget };

enum class DistanceMetric { kEuclidean, kCosineDistance };

// Pooled reference embeddings for one machine type, all from the same layer.
class ReferenceStore {
 public:
  ReferenceStore(std::string machine_type, int layer)
      : machine_type_(std::move(machine_type)), layer_(layer) {}

  void add(const PooledEmbedding& e, Domain domain);

  const std::string& machine_type() const { return machine_type_; }
  int layer() const { return layer_; }
  int size() const { return static_cast<int>(rows_.size()); }
  int n_source() const { return n_source_; }
  int n_target() const { return n_target_; }
  const std::vector<double>& row(int i) const { return rows_[i]; }
  Domain domain(int i) const { return domains_[i]; }

  void save(const std::string& path) const;
  static ReferenceStore load(const std::string& path);

 private:
  std::string machine_type_;
  int layer_ = 0;
  std::vector<std::vector<double>> rows_;
  std::vector<Domain> domains_;
  int n_source_ = 0;
  int n_target_ = 0;
};

// Mean distance to the k nearest references; ties broken by insertion order.
// Throws EmptyStore / KTooLarge.
double knn_score(const PooledEmbedding& test, const ReferenceStore& store, int k,
                 DistanceMetric metric = DistanceMetric::kEuclidean);

// extract_logmel -> apply_norm -> forward(layer) -> pool.
PooledEmbedding embed_clip(const Parameters& params, const Waveform& w, int layer,
                           const NormStats& stats);

// pool of the convex combination of the separately encoded clean and noise
// clips: the representation a perfect mixture embedding would match.
PooledEmbedding embedding_mixture_oracle(const Parameters& params, const Waveform& clean,
                                         const Waveform& noise, double lambda, int layer,
                                         const NormStats& stats);

}  // namespace mixret

#endif  // MIXRET_SCORING_H_
