// core/src/encoder.cc

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

#include "mixret/encoder.h"

#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "internal_json.h"

namespace mixret {

namespace {

void validate(const EncoderConfig& c) {
  if (c.patch_t < 1 || c.patch_f < 1)
    throw InvalidParams("encoder: patch sizes must be >= 1");
  if (c.d_model < 1) throw InvalidParams("encoder: d_model must be >= 1");
  if (c.n_layers < 1) throw InvalidParams("encoder: n_layers must be >= 1");
  if (c.n_classes < 0) throw InvalidParams("encoder: n_classes must be >= 0");
}

// View of one tensor inside the flat vector.
struct Tensor {
  const double* p;
  int rows, cols;
  double at(int r, int c) const { return p[static_cast<size_t>(r) * cols + c]; }
};

struct TensorMut {
  double* p;
  int rows, cols;
  double& at(int r, int c) { return p[static_cast<size_t>(r) * cols + c]; }
};

Tensor view(const Parameters& params, const ParameterLayout& layout, const std::string& name) {
  const TensorSpec& t = layout.find(name);
  return Tensor{params.values.data() + t.offset, t.rows, t.cols};
}

TensorMut view(std::vector<double>& grad, const ParameterLayout& layout, const std::string& name) {
  const TensorSpec& t = layout.find(name);
  return TensorMut{grad.data() + t.offset, t.rows, t.cols};
}

// out = x * W^T + b, x is L x in, W is out_dim x in, b is out_dim.
void linear(const Matrix& x, Tensor w, Tensor b, Matrix& out) {
  out = Matrix(x.rows, w.rows);
  for (int l = 0; l < x.rows; ++l) {
    const double* xr = x.data.data() + static_cast<size_t>(l) * x.cols;
    double* or_ = out.data.data() + static_cast<size_t>(l) * out.cols;
    for (int i = 0; i < w.rows; ++i) {
      const double* wr = w.p + static_cast<size_t>(i) * w.cols;
      double acc = b.p[i];
      for (int j = 0; j < x.cols; ++j) acc += wr[j] * xr[j];
      or_[i] = acc;
    }
  }
}

// dw += g^T * x, db += column sums of g; g is L x out, x is L x in.
void linear_backward_params(const Matrix& g, const Matrix& x, TensorMut dw, TensorMut db) {
  for (int l = 0; l < g.rows; ++l) {
    const double* gr = g.data.data() + static_cast<size_t>(l) * g.cols;
    const double* xr = x.data.data() + static_cast<size_t>(l) * x.cols;
    for (int i = 0; i < g.cols; ++i) {
      double gi = gr[i];
      if (gi == 0.0) continue;
      double* dwr = dw.p + static_cast<size_t>(i) * dw.cols;
      for (int j = 0; j < x.cols; ++j) dwr[j] += gi * xr[j];
      db.p[i] += gi;
    }
  }
}

// dx += g * W; g is L x out, W is out x in.
void linear_backward_input(const Matrix& g, Tensor w, Matrix& dx) {
  for (int l = 0; l < g.rows; ++l) {
    const double* gr = g.data.data() + static_cast<size_t>(l) * g.cols;
    double* dxr = dx.data.data() + static_cast<size_t>(l) * dx.cols;
    for (int i = 0; i < g.cols; ++i) {
      double gi = gr[i];
      if (gi == 0.0) continue;
      const double* wr = w.p + static_cast<size_t>(i) * w.cols;
      for (int j = 0; j < dx.cols; ++j) dxr[j] += gi * wr[j];
    }
  }
}

struct PatchResult {
  Matrix patches;
  int t_patches, f_patches;
};

PatchResult patchify(const MelFeatures& features, const EncoderConfig& c) {
  const Matrix& x = features.values;
  int t_patches = (x.rows + c.patch_t - 1) / c.patch_t;
  int f_patches = (x.cols + c.patch_f - 1) / c.patch_f;
  int pdim = c.patch_t * c.patch_f;
  PatchResult out;
  out.t_patches = t_patches;
  out.f_patches = f_patches;
  out.patches = Matrix(t_patches * f_patches, pdim);
  for (int ti = 0; ti < t_patches; ++ti) {
    for (int fi = 0; fi < f_patches; ++fi) {
      double* row = out.patches.data.data() +
                    static_cast<size_t>(ti * f_patches + fi) * pdim;
      for (int a = 0; a < c.patch_t; ++a) {
        int r = ti * c.patch_t + a;
        for (int b = 0; b < c.patch_f; ++b) {
          int cc = fi * c.patch_f + b;
          row[a * c.patch_f + b] =
              (r < x.rows && cc < x.cols) ? x.at(r, cc) : 0.0;  // zero tail pad
        }
      }
    }
  }
  return out;
}

ForwardCache run_forward(const Parameters& params, const MelFeatures& features,
                         int up_to_layer, bool with_head) {
  const EncoderConfig& c = params.config;
  validate(c);
  ParameterLayout layout = layout_for(c);
  if (params.values.size() != layout.total_size)
    throw ShapeMismatch("encoder forward: parameter vector size mismatch");

  ForwardCache cache;
  PatchResult pr = patchify(features, c);
  cache.patches = std::move(pr.patches);
  cache.t_patches = pr.t_patches;
  cache.f_patches = pr.f_patches;

  cache.taps.resize(up_to_layer + 1);
  cache.tanh_u.resize(up_to_layer);
  linear(cache.patches, view(params, layout, "proj.w"), view(params, layout, "proj.b"),
         cache.taps[0]);

  Matrix u;
  for (int k = 1; k <= up_to_layer; ++k) {
    std::string base = "block" + std::to_string(k);
    linear(cache.taps[k - 1], view(params, layout, base + ".w1"),
           view(params, layout, base + ".b1"), u);
    for (double& v : u.data) v = std::tanh(v);
    cache.tanh_u[k - 1] = u;
    Matrix inc;
    linear(u, view(params, layout, base + ".w2"), view(params, layout, base + ".b2"), inc);
    cache.taps[k] = cache.taps[k - 1];
    for (size_t i = 0; i < inc.data.size(); ++i) cache.taps[k].data[i] += inc.data[i];
  }

  if (with_head) {
    const Matrix& last = cache.taps[up_to_layer];
    cache.pooled.assign(c.d_model, 0.0);
    for (int l = 0; l < last.rows; ++l)
      for (int d = 0; d < c.d_model; ++d) cache.pooled[d] += last.at(l, d);
    for (double& v : cache.pooled) v /= last.rows;
    if (c.n_classes > 0) {
      Tensor wh = view(params, layout, "head.w");
      Tensor bh = view(params, layout, "head.b");
      cache.logits.assign(c.n_classes, 0.0);
      for (int k = 0; k < c.n_classes; ++k) {
        double acc = bh.p[k];
        for (int d = 0; d < c.d_model; ++d) acc += wh.at(k, d) * cache.pooled[d];
        cache.logits[k] = acc;
      }
    }
  }
  return cache;
}

FrameEmbedding tap_to_embedding(const ForwardCache& cache, int layer) {
  FrameEmbedding e;
  e.values = cache.taps[layer];
  e.t_patches = cache.t_patches;
  e.f_patches = cache.f_patches;
  e.layer_index = layer;
  return e;
}

}  // namespace

bool operator==(const EncoderConfig& a, const EncoderConfig& b) {
  return a.patch_t == b.patch_t && a.patch_f == b.patch_f && a.d_model == b.d_model &&
         a.n_layers == b.n_layers && a.n_classes == b.n_classes && a.seed == b.seed;
}

const TensorSpec& ParameterLayout::find(const std::string& name) const {
  for (const TensorSpec& t : tensors)
    if (t.name == name) return t;
  throw ShapeMismatch("parameter layout: no tensor named " + name);
}

ParameterLayout layout_for(const EncoderConfig& c) {
  validate(c);
  ParameterLayout layout;
  size_t off = 0;
  auto add = [&](const std::string& name, int rows, int cols) {
    layout.tensors.push_back({name, rows, cols, off});
    off += static_cast<size_t>(rows) * cols;
  };
  int pdim = c.patch_t * c.patch_f;
  add("proj.w", c.d_model, pdim);
  add("proj.b", c.d_model, 1);
  for (int k = 1; k <= c.n_layers; ++k) {
    std::string base = "block" + std::to_string(k);
    add(base + ".w1", c.d_model, c.d_model);
    add(base + ".b1", c.d_model, 1);
    add(base + ".w2", c.d_model, c.d_model);
    add(base + ".b2", c.d_model, 1);
  }
  if (c.n_classes > 0) {
    add("head.w", c.n_classes, c.d_model);
    add("head.b", c.n_classes, 1);
  }
  layout.total_size = off;
  return layout;
}

Parameters init_parameters(const EncoderConfig& config) {
  ParameterLayout layout = layout_for(config);
  Parameters params;
  params.config = config;
  params.values.assign(layout.total_size, 0.0);
  Rng rng(mix_seed(config.seed, 0x656e636f64657221ull));
  for (const TensorSpec& t : layout.tensors) {
    if (t.cols == 1) continue;  // biases stay zero
    double bound = std::sqrt(6.0 / (t.cols + t.rows));  // fan_in + fan_out
    for (size_t i = 0; i < t.size(); ++i)
      params.values[t.offset + i] = rng.uniform(-bound, bound);
  }
  return params;
}

FrameEmbedding forward(const Parameters& params, const MelFeatures& features, int layer) {
  if (layer < 1 || layer > params.config.n_layers)
    throw LayerOutOfRange("forward: layer " + std::to_string(layer) + " not in [1, " +
                          std::to_string(params.config.n_layers) + "]");
  ForwardCache cache = run_forward(params, features, layer, /*with_head=*/false);
  return tap_to_embedding(cache, layer);
}

std::pair<FrameEmbedding, std::vector<double>> forward_with_head(
    const Parameters& params, const MelFeatures& features) {
  ForwardCache cache = run_forward(params, features, params.config.n_layers, true);
  return {tap_to_embedding(cache, params.config.n_layers), cache.logits};
}

ForwardCache forward_cached(const Parameters& params, const MelFeatures& features) {
  return run_forward(params, features, params.config.n_layers, true);
}

namespace {

// Shared reverse pass. Blocks above `start_layer` receive zero gradient.
std::vector<double> reverse(const Parameters& params, const ForwardCache& cache,
                            Matrix g, int start_layer,
                            const std::vector<double>& grad_logits) {
  const EncoderConfig& c = params.config;
  ParameterLayout layout = layout_for(c);
  std::vector<double> grad(layout.total_size, 0.0);

  if (!grad_logits.empty()) {
    if (static_cast<int>(grad_logits.size()) != c.n_classes)
      throw ShapeMismatch("backward: grad_logits length != n_classes");
    TensorMut dwh = view(grad, layout, "head.w");
    TensorMut dbh = view(grad, layout, "head.b");
    Tensor wh = view(params, layout, "head.w");
    const int rows = cache.taps.back().rows;
    std::vector<double> dpooled(c.d_model, 0.0);
    for (int k = 0; k < c.n_classes; ++k) {
      double gk = grad_logits[k];
      dbh.p[k] += gk;
      for (int d = 0; d < c.d_model; ++d) {
        dwh.at(k, d) += gk * cache.pooled[d];
        dpooled[d] += gk * wh.at(k, d);
      }
    }
    // pooled = mean over L rows of the final tap
    for (int l = 0; l < rows; ++l)
      for (int d = 0; d < c.d_model; ++d) g.at(l, d) += dpooled[d] / rows;
  }

  for (int k = start_layer; k >= 1; --k) {
    std::string base = "block" + std::to_string(k);
    const Matrix& t = cache.tanh_u[k - 1];
    Matrix dt(t.rows, t.cols);
    linear_backward_input(g, view(params, layout, base + ".w2"), dt);
    linear_backward_params(g, t, view(grad, layout, base + ".w2"),
                           view(grad, layout, base + ".b2"));
    // through tanh
    for (size_t i = 0; i < dt.data.size(); ++i)
      dt.data[i] *= 1.0 - t.data[i] * t.data[i];
    linear_backward_params(dt, cache.taps[k - 1], view(grad, layout, base + ".w1"),
                           view(grad, layout, base + ".b1"));
    // residual: gradient flows both through the block and around it
    linear_backward_input(dt, view(params, layout, base + ".w1"), g);
  }
  linear_backward_params(g, cache.patches, view(grad, layout, "proj.w"),
                         view(grad, layout, "proj.b"));
  return grad;
}

}  // namespace

std::vector<double> backward(const Parameters& params, const MelFeatures& features,
                             const Matrix& upstream, int layer) {
  if (layer < 1 || layer > params.config.n_layers)
    throw LayerOutOfRange("backward: layer out of range");
  ForwardCache cache = run_forward(params, features, layer, /*with_head=*/false);
  if (!upstream.same_shape(cache.taps[layer]))
    throw ShapeMismatch("backward: upstream gradient shape mismatch");
  return reverse(params, cache, upstream, layer, {});
}

std::vector<double> backward_with_head(const Parameters& params,
                                       const ForwardCache& cache,
                                       const Matrix& grad_final_embedding,
                                       const std::vector<double>& grad_logits) {
  const Matrix& last = cache.taps.back();
  Matrix g = grad_final_embedding;
  if (g.rows == 0 && g.cols == 0) {
    g = Matrix(last.rows, last.cols);
  } else if (!g.same_shape(last)) {
    throw ShapeMismatch("backward_with_head: embedding gradient shape mismatch");
  }
  return reverse(params, cache, std::move(g),
                 static_cast<int>(cache.tanh_u.size()), grad_logits);
}

std::vector<double> backward_at_layer(const Parameters& params,
                                      const ForwardCache& cache,
                                      const Matrix& upstream, int layer) {
  if (layer < 1 || layer >= static_cast<int>(cache.taps.size()))
    throw LayerOutOfRange("backward_at_layer: layer out of range");
  if (!upstream.same_shape(cache.taps[layer]))
    throw ShapeMismatch("backward_at_layer: upstream gradient shape mismatch");
  return reverse(params, cache, upstream, layer, {});
}

TeacherHandle freeze_teacher(const Parameters& params) { return TeacherHandle(params); }

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void save_parameters(const Parameters& params, const std::string& path) {
  ParameterLayout layout = layout_for(params.config);
  nlohmann::json j;
  j["config"] = internal::encoder_config_to_json(params.config);
  nlohmann::json table = nlohmann::json::array();
  for (const TensorSpec& t : layout.tensors)
    table.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols},
                     {"offset", t.offset}});
  j["layout"] = table;
  j["hash"] = params.hash();
  std::string header = j.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("save_parameters: cannot open " + path);
  os.write("MRPB", 4);
  char version = 1;
  os.write(&version, 1);
  uint32_t len = static_cast<uint32_t>(header.size());
  os.write(reinterpret_cast<const char*>(&len), 4);
  os.write(header.data(), len);
  os.write(reinterpret_cast<const char*>(params.values.data()),
           static_cast<std::streamsize>(params.values.size() * sizeof(double)));
  if (!os) throw IoFailure("save_parameters: short write to " + path);
}

Parameters load_parameters(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("load_parameters: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "MRPB", 4) != 0)
    throw CorruptCheckpoint("load_parameters: bad magic in " + path);
  char version = 0;
  is.read(&version, 1);
  if (version != 1) throw CorruptCheckpoint("load_parameters: unknown version");
  uint32_t len = 0;
  is.read(reinterpret_cast<char*>(&len), 4);
  std::string header(len, '\0');
  is.read(header.data(), len);
  if (!is) throw CorruptCheckpoint("load_parameters: truncated header");

  nlohmann::json j = nlohmann::json::parse(header, nullptr, false);
  if (j.is_discarded()) throw CorruptCheckpoint("load_parameters: bad header JSON");
  Parameters params;
  params.config = internal::encoder_config_from_json(j.at("config"));
  ParameterLayout layout = layout_for(params.config);
  params.values.resize(layout.total_size);
  is.read(reinterpret_cast<char*>(params.values.data()),
          static_cast<std::streamsize>(layout.total_size * sizeof(double)));
  if (!is) throw CorruptCheckpoint("load_parameters: truncated payload");
  if (j.at("hash").get<uint64_t>() != params.hash())
    throw CorruptCheckpoint("load_parameters: content hash mismatch");
  return params;
}

}  // namespace mixret
