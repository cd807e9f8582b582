// core/src/scoring.cc

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

#include "mixret/scoring.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace mixret {

PooledEmbedding pool(const FrameEmbedding& e) {
  const int t = e.t_patches;
  const int f = e.f_patches;
  const int d = e.values.cols;
  if (t < 1 || f < 1 || t * f != e.values.rows)
    throw ShapeMismatch("pool: L != t_patches * f_patches");
  PooledEmbedding out;
  out.source_layer = e.layer_index;
  out.values.assign(static_cast<size_t>(f) * d, 0.0);
  for (int ti = 0; ti < t; ++ti) {
    for (int fi = 0; fi < f; ++fi) {
      const double* row = e.values.data.data() +
                          static_cast<size_t>(ti * f + fi) * d;
      double* dst = out.values.data() + static_cast<size_t>(fi) * d;
      for (int k = 0; k < d; ++k) dst[k] += row[k];
    }
  }
  for (double& v : out.values) v /= t;
  return out;
}

void ReferenceStore::add(const PooledEmbedding& e, Domain domain) {
  if (!rows_.empty() && rows_.front().size() != e.values.size())
    throw ShapeMismatch("ReferenceStore::add: embedding length mismatch");
  if (e.source_layer != layer_)
    throw ShapeMismatch("ReferenceStore::add: embedding from layer " +
                        std::to_string(e.source_layer) + ", store expects " +
                        std::to_string(layer_));
  rows_.push_back(e.values);
  domains_.push_back(domain);
  (domain == Domain::kSource ? n_source_ : n_target_)++;
}

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  long double acc = 0.0L;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += static_cast<long double>(d) * d;
  }
  return std::sqrt(static_cast<double>(acc));
}

double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
  long double dot = 0.0L, na = 0.0L, nb = 0.0L;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  if (na <= 0.0L || nb <= 0.0L) return 1.0;  // zero vector: maximally dissimilar
  return 1.0 - static_cast<double>(dot / (std::sqrt(na) * std::sqrt(nb)));
}

}  // namespace

double knn_score(const PooledEmbedding& test, const ReferenceStore& store, int k,
                 DistanceMetric metric) {
  if (store.size() == 0) throw EmptyStore("knn_score: empty reference store");
  if (k < 1) throw KTooLarge("knn_score: k must be >= 1");
  if (k > store.size()) throw KTooLarge("knn_score: k exceeds store size");

  std::vector<std::pair<double, int>> dist(store.size());
  for (int i = 0; i < store.size(); ++i) {
    if (store.row(i).size() != test.values.size())
      throw ShapeMismatch("knn_score: embedding length mismatch");
    double d = metric == DistanceMetric::kEuclidean
                   ? euclidean(test.values, store.row(i))
                   : cosine_distance(test.values, store.row(i));
    dist[i] = {d, i};  // index second: ties resolve by insertion order
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  double acc = 0.0;
  for (int i = 0; i < k; ++i) acc += dist[i].first;
  return acc / k;
}

PooledEmbedding embed_clip(const Parameters& params, const Waveform& w, int layer,
                           const NormStats& stats) {
  MelFeatures f = apply_norm(extract_logmel(w), stats);
  return pool(forward(params, f, layer));
}

PooledEmbedding embedding_mixture_oracle(const Parameters& params, const Waveform& clean,
                                         const Waveform& noise, double lambda, int layer,
                                         const NormStats& stats) {
  MelFeatures fc = apply_norm(extract_logmel(clean), stats);
  MelFeatures fn = apply_norm(extract_logmel(noise), stats);
  FrameEmbedding ec = forward(params, fc, layer);
  FrameEmbedding en = forward(params, fn, layer);
  return pool(convex_teacher_target(ec, en, lambda));
}

// ---------------------------------------------------------------------------
// Store file format: "MRES", version byte, u32 header length, JSON header
// {machine_type, layer, n_source, n_target, dim}, then little-endian f32
// row-major matrix (source rows first, then target rows in insertion order).
// ---------------------------------------------------------------------------

void ReferenceStore::save(const std::string& path) const {
  nlohmann::json j = {{"machine_type", machine_type_},
                      {"layer", layer_},
                      {"n_source", n_source_},
                      {"n_target", n_target_},
                      {"dim", rows_.empty() ? 0 : static_cast<int>(rows_.front().size())}};
  std::string header = j.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("ReferenceStore::save: cannot open " + path);
  os.write("MRES", 4);
  char version = 1;
  os.write(&version, 1);
  uint32_t len = static_cast<uint32_t>(header.size());
  os.write(reinterpret_cast<const char*>(&len), 4);
  os.write(header.data(), len);
  auto write_rows = [&](Domain d) {
    for (size_t i = 0; i < rows_.size(); ++i) {
      if (domains_[i] != d) continue;
      for (double v : rows_[i]) {
        float x = static_cast<float>(v);
        os.write(reinterpret_cast<const char*>(&x), sizeof(float));
      }
    }
  };
  write_rows(Domain::kSource);
  write_rows(Domain::kTarget);
  if (!os) throw IoFailure("ReferenceStore::save: short write to " + path);
}

ReferenceStore ReferenceStore::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("ReferenceStore::load: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "MRES", 4) != 0)
    throw UnsupportedFormat("ReferenceStore::load: bad magic in " + path);
  char version = 0;
  is.read(&version, 1);
  if (version != 1) throw UnsupportedFormat("ReferenceStore::load: unknown version");
  uint32_t len = 0;
  is.read(reinterpret_cast<char*>(&len), 4);
  std::string header(len, '\0');
  is.read(header.data(), len);
  if (!is) throw UnsupportedFormat("ReferenceStore::load: truncated header");
  nlohmann::json j = nlohmann::json::parse(header, nullptr, false);
  if (j.is_discarded()) throw UnsupportedFormat("ReferenceStore::load: bad header JSON");

  ReferenceStore store(j.at("machine_type").get<std::string>(), j.at("layer").get<int>());
  int n_source = j.at("n_source").get<int>();
  int n_target = j.at("n_target").get<int>();
  int dim = j.at("dim").get<int>();
  auto read_row = [&](Domain d) {
    PooledEmbedding e;
    e.source_layer = store.layer();
    e.values.resize(dim);
    for (int c = 0; c < dim; ++c) {
      float x = 0.0f;
      is.read(reinterpret_cast<char*>(&x), sizeof(float));
      e.values[c] = x;
    }
    store.add(e, d);
  };
  for (int i = 0; i < n_source; ++i) read_row(Domain::kSource);
  for (int i = 0; i < n_target; ++i) read_row(Domain::kTarget);
  if (!is) throw UnsupportedFormat("ReferenceStore::load: truncated payload");
  return store;
}

}  // namespace mixret
