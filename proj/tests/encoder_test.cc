// tests/encoder_test.cc

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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mixret/encoder.h"
#include "oracles.h"

using namespace mixret;

namespace {

EncoderConfig tiny_config() {
  EncoderConfig c;
  c.patch_t = 4;
  c.patch_f = 4;
  c.d_model = 8;
  c.n_layers = 2;
  c.n_classes = 5;
  c.seed = 1234;
  return c;
}

MelFeatures random_features(Rng& rng, int t, int f) {
  MelFeatures m;
  m.values = Matrix(t, f);
  for (double& v : m.values.data) v = rng.gaussian();
  return m;
}

}  // namespace

TEST_SUITE("encoder") {

TEST_CASE("init is deterministic with zero biases and bounded weights") {
  EncoderConfig cfg = tiny_config();
  Parameters a = init_parameters(cfg);
  Parameters b = init_parameters(cfg);
  CHECK(a.values == b.values);

  ParameterLayout layout = layout_for(cfg);
  CHECK(layout.total_size == a.values.size());
  for (const TensorSpec& t : layout.tensors) {
    if (t.cols == 1) {
      for (size_t i = 0; i < t.size(); ++i) CHECK(a.values[t.offset + i] == 0.0);
    } else {
      double bound = std::sqrt(6.0 / (t.rows + t.cols));
      double max_abs = 0.0;
      for (size_t i = 0; i < t.size(); ++i)
        max_abs = std::max(max_abs, std::abs(a.values[t.offset + i]));
      CHECK(max_abs <= bound);
      CHECK(max_abs > 0.0);
    }
  }

  cfg.seed = 999;
  CHECK(init_parameters(cfg).values != a.values);
}

TEST_CASE("layout offsets partition the vector exactly") {
  ParameterLayout layout = layout_for(tiny_config());
  size_t expect = 0;
  for (const TensorSpec& t : layout.tensors) {
    CHECK(t.offset == expect);
    expect += t.size();
  }
  CHECK(expect == layout.total_size);
}

TEST_CASE("patch arithmetic with tail padding") {
  EncoderConfig cfg;
  cfg.patch_t = 16;
  cfg.patch_f = 16;
  cfg.d_model = 4;
  cfg.n_layers = 1;
  cfg.n_classes = 0;
  Parameters params = init_parameters(cfg);
  Rng rng(5);
  MelFeatures f = random_features(rng, 998, 128);
  FrameEmbedding e = forward(params, f, 1);
  CHECK(e.t_patches == 63);  // ceil(998/16)
  CHECK(e.f_patches == 8);   // 128/16
  CHECK(e.values.rows == 504);
  CHECK(e.values.cols == 4);
  CHECK(e.values.all_finite());
}

TEST_CASE("zero input with zero parameters stays zero") {
  EncoderConfig cfg = tiny_config();
  Parameters params = init_parameters(cfg);
  for (double& v : params.values) v = 0.0;
  MelFeatures f;
  f.values = Matrix(8, 8);
  FrameEmbedding e = forward(params, f, 1);
  for (double v : e.values.data) CHECK(v == 0.0);
}

TEST_CASE("tap at layer k plus block k+1 equals tap at layer k+1") {
  EncoderConfig cfg = tiny_config();
  Parameters params = init_parameters(cfg);
  Rng rng(17);
  MelFeatures f = random_features(rng, 12, 8);
  FrameEmbedding tap1 = forward(params, f, 1);
  FrameEmbedding tap2 = forward(params, f, 2);

  // recompute block 2 externally from the layout table
  ParameterLayout layout = layout_for(cfg);
  const TensorSpec& w1 = layout.find("block2.w1");
  const TensorSpec& b1 = layout.find("block2.b1");
  const TensorSpec& w2 = layout.find("block2.w2");
  const TensorSpec& b2 = layout.find("block2.b2");
  const int d = cfg.d_model;
  for (int l = 0; l < tap1.values.rows; ++l) {
    std::vector<double> u(d, 0.0), inc(d, 0.0);
    for (int i = 0; i < d; ++i) {
      double acc = params.values[b1.offset + i];
      for (int j = 0; j < d; ++j)
        acc += params.values[w1.offset + i * d + j] * tap1.values.at(l, j);
      u[i] = std::tanh(acc);
    }
    for (int i = 0; i < d; ++i) {
      double acc = params.values[b2.offset + i];
      for (int j = 0; j < d; ++j) acc += params.values[w2.offset + i * d + j] * u[j];
      inc[i] = acc;
    }
    for (int i = 0; i < d; ++i)
      CHECK(tap1.values.at(l, i) + inc[i] ==
            doctest::Approx(tap2.values.at(l, i)).epsilon(1e-12));
  }
}

TEST_CASE("layer bounds") {
  Parameters params = init_parameters(tiny_config());
  Rng rng(3);
  MelFeatures f = random_features(rng, 8, 8);
  CHECK_THROWS_AS(forward(params, f, 0), LayerOutOfRange);
  CHECK_THROWS_AS(forward(params, f, 3), LayerOutOfRange);
}

TEST_CASE("head logits against a dense matmul oracle") {
  EncoderConfig cfg = tiny_config();
  Parameters params = init_parameters(cfg);
  Rng rng(23);
  MelFeatures f = random_features(rng, 8, 8);
  auto [emb, logits] = forward_with_head(params, f);
  REQUIRE(static_cast<int>(logits.size()) == cfg.n_classes);

  // oracle: mean over rows, then explicit matrix product
  std::vector<double> pooled(cfg.d_model, 0.0);
  for (int l = 0; l < emb.values.rows; ++l)
    for (int d = 0; d < cfg.d_model; ++d) pooled[d] += emb.values.at(l, d);
  for (double& v : pooled) v /= emb.values.rows;
  ParameterLayout layout = layout_for(cfg);
  const TensorSpec& wh = layout.find("head.w");
  const TensorSpec& bh = layout.find("head.b");
  for (int k = 0; k < cfg.n_classes; ++k) {
    double acc = params.values[bh.offset + k];
    for (int d = 0; d < cfg.d_model; ++d)
      acc += params.values[wh.offset + k * cfg.d_model + d] * pooled[d];
    CHECK(logits[k] == doctest::Approx(acc).epsilon(1e-10));
  }

  SUBCASE("zero weights leave only the bias") {
    for (const TensorSpec& t : layout.tensors)
      if (t.name != "head.b")
        for (size_t i = 0; i < t.size(); ++i) params.values[t.offset + i] = 0.0;
    for (size_t i = 0; i < bh.size(); ++i) params.values[bh.offset + i] = 0.5 + i;
    auto [emb0, logits0] = forward_with_head(params, f);
    (void)emb0;
    for (int k = 0; k < cfg.n_classes; ++k) CHECK(logits0[k] == doctest::Approx(0.5 + k));
  }
}

TEST_CASE("backward matches finite differences through a tap") {
  EncoderConfig cfg = tiny_config();
  Parameters params = init_parameters(cfg);
  Rng rng(31);
  MelFeatures f = random_features(rng, 9, 7);  // padding exercised

  FrameEmbedding out = forward(params, f, cfg.n_layers);
  Matrix upstream(out.values.rows, out.values.cols);
  for (double& v : upstream.data) v = rng.gaussian();

  std::vector<double> grad = backward(params, f, upstream, cfg.n_layers);
  REQUIRE(grad.size() == params.values.size());

  auto objective = [&]() {
    FrameEmbedding e = forward(params, f, cfg.n_layers);
    double acc = 0.0;
    for (size_t i = 0; i < e.values.data.size(); ++i)
      acc += upstream.data[i] * e.values.data[i];
    return acc;
  };
  Rng pick(77);
  for (int trial = 0; trial < 50; ++trial) {
    size_t idx = static_cast<size_t>(pick.uniform_int(0, static_cast<int>(grad.size()) - 1));
    double fd = testing::central_difference(params.values, idx, 1e-4, objective);
    double scale = std::max({1.0, std::abs(fd), std::abs(grad[idx])});
    CHECK(std::abs(fd - grad[idx]) / scale < 1e-4);
  }
}

TEST_CASE("backward_at_layer matches the standalone backward") {
  EncoderConfig cfg = tiny_config();
  Parameters params = init_parameters(cfg);
  Rng rng(37);
  MelFeatures f = random_features(rng, 10, 8);
  ForwardCache cache = forward_cached(params, f);
  for (int layer = 1; layer <= cfg.n_layers; ++layer) {
    Matrix upstream(cache.taps[layer].rows, cache.taps[layer].cols);
    for (double& v : upstream.data) v = rng.gaussian();
    std::vector<double> via_cache = backward_at_layer(params, cache, upstream, layer);
    std::vector<double> direct = backward(params, f, upstream, layer);
    REQUIRE(via_cache.size() == direct.size());
    for (size_t i = 0; i < direct.size(); ++i) CHECK(via_cache[i] == direct[i]);
  }
  Matrix bad(1, 1);
  CHECK_THROWS_AS(backward_at_layer(params, cache, bad, 1), ShapeMismatch);
  Matrix ok(cache.taps[1].rows, cache.taps[1].cols);
  CHECK_THROWS_AS(backward_at_layer(params, cache, ok, 0), LayerOutOfRange);
}

TEST_CASE("backward is linear in the upstream gradient") {
  EncoderConfig cfg = tiny_config();
  Parameters params = init_parameters(cfg);
  Rng rng(41);
  MelFeatures f = random_features(rng, 8, 8);
  FrameEmbedding out = forward(params, f, 2);

  Matrix g1(out.values.rows, out.values.cols), g2 = g1, g12 = g1;
  for (size_t i = 0; i < g1.data.size(); ++i) {
    g1.data[i] = rng.gaussian();
    g2.data[i] = rng.gaussian();
    g12.data[i] = g1.data[i] + g2.data[i];
  }
  std::vector<double> a = backward(params, f, g1, 2);
  std::vector<double> b = backward(params, f, g2, 2);
  std::vector<double> ab = backward(params, f, g12, 2);
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(ab[i] == doctest::Approx(a[i] + b[i]).epsilon(1e-10));

  SUBCASE("zero upstream gives zero gradient") {
    Matrix zero(out.values.rows, out.values.cols);
    for (double v : backward(params, f, zero, 2)) CHECK(v == 0.0);
  }
}

TEST_CASE("frozen teacher never moves") {
  EncoderConfig cfg = tiny_config();
  Parameters student = init_parameters(cfg);
  TeacherHandle teacher = freeze_teacher(student);
  CHECK(teacher.hash_at_freeze() == student.hash());

  Rng rng(53);
  MelFeatures f = random_features(rng, 8, 8);
  FrameEmbedding t0 = teacher.forward(f, cfg.n_layers);
  FrameEmbedding s0 = forward(student, f, cfg.n_layers);
  CHECK(t0.values == s0.values);  // identical at freeze time

  // mutate the student arbitrarily; the teacher cannot follow
  for (double& v : student.values) v += 0.25;
  CHECK(teacher.current_hash() == teacher.hash_at_freeze());
  FrameEmbedding s1 = forward(student, f, cfg.n_layers);
  FrameEmbedding t1 = teacher.forward(f, cfg.n_layers);
  CHECK(t1.values == t0.values);
  CHECK(!(s1.values == t1.values));
  CHECK(teacher.forward_calls() == 2);
}

TEST_CASE("parameter files round trip and detect corruption") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "mixret_encoder_test";
  fs::create_directories(dir);
  std::string path = (dir / "params.bin").string();

  Parameters params = init_parameters(tiny_config());
  save_parameters(params, path);
  Parameters back = load_parameters(path);
  CHECK(back.values == params.values);
  CHECK(back.config == params.config);

  // flip one payload byte; the content hash must catch it
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(-1, std::ios::end);
    char c;
    f.seekg(-1, std::ios::end);
    f.get(c);
    f.seekp(-1, std::ios::end);
    c ^= 0x40;
    f.put(c);
  }
  CHECK_THROWS_AS(load_parameters(path), CorruptCheckpoint);
}

TEST_CASE("embeddings stay finite for bounded inputs") {
  EncoderConfig cfg = tiny_config();
  Parameters params = init_parameters(cfg);
  Rng rng(61);
  MelFeatures f;
  f.values = Matrix(16, 8);
  for (double& v : f.values.data) v = rng.uniform(-100.0, 100.0);
  for (int layer = 1; layer <= cfg.n_layers; ++layer)
    CHECK(forward(params, f, layer).values.all_finite());
}

}  // TEST_SUITE
