// tests/losses_test.cc

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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "mixret/losses.h"

using namespace mixret;

namespace {

FrameEmbedding embedding_of(std::vector<double> values, int rows, int cols) {
  FrameEmbedding e;
  e.values = Matrix(rows, cols);
  e.values.data = std::move(values);
  e.t_patches = rows;
  e.f_patches = 1;
  return e;
}

}  // namespace

TEST_SUITE("losses") {

TEST_CASE("bce value at zero logits is K ln 2") {
  int k = 7;
  std::vector<double> logits(k, 0.0);
  LabelVector y = make_label(k, 0, {0, 3});
  BceResult r = bce_multilabel(logits, y);
  CHECK(r.value == doctest::Approx(k * std::log(2.0)).epsilon(1e-12));
  for (int i = 0; i < k; ++i)
    CHECK(r.grad_logits[i] == doctest::Approx(0.5 - (y.values[i] ? 1.0 : 0.0)));
}

TEST_CASE("bce stays finite and tiny at saturation") {
  std::vector<double> logits = {20.0};
  LabelVector y = make_label(1, 0, {0});
  BceResult r = bce_multilabel(logits, y);
  CHECK(r.value == doctest::Approx(std::log1p(std::exp(-20.0))).epsilon(1e-9));
  CHECK(r.value < 3e-9);
  CHECK(std::abs(r.grad_logits[0]) < 1e-8);

  // extreme logits must not overflow
  std::vector<double> extreme = {1000.0, -1000.0};
  LabelVector y2 = make_label(2, 0, {0});
  BceResult r2 = bce_multilabel(extreme, y2);
  CHECK(std::isfinite(r2.value));
  CHECK(r2.value < 1e-12);
}

TEST_CASE("bce gradient matches finite differences") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    int k = rng.uniform_int(1, 32);
    std::vector<double> logits(k);
    std::vector<int> set;
    for (int i = 0; i < k; ++i) {
      logits[i] = rng.uniform(-4.0, 4.0);
      if (rng.uniform() < 0.4) set.push_back(i);
    }
    if (set.empty()) set.push_back(0);
    LabelVector y = make_label(k, 0, set);
    BceResult r = bce_multilabel(logits, y);
    const double h = 1e-6;
    for (int i = 0; i < k; ++i) {
      std::vector<double> up = logits, down = logits;
      up[i] += h;
      down[i] -= h;
      double fd = (bce_multilabel(up, y).value - bce_multilabel(down, y).value) / (2 * h);
      double scale = std::max(1e-3, std::abs(fd));
      CHECK(std::abs(fd - r.grad_logits[i]) / scale < 1e-6);
    }
  }
}

TEST_CASE("bce length mismatch") {
  std::vector<double> logits(3, 0.0);
  CHECK_THROWS_AS(bce_multilabel(logits, make_label(2, 0, {0})), LengthMismatch);
}

TEST_CASE("convex teacher target endpoints and midpoint") {
  FrameEmbedding a = embedding_of({2, 2, 2, 2}, 4, 1);
  FrameEmbedding b = embedding_of({4, 4, 4, 4}, 4, 1);
  CHECK(convex_teacher_target(a, b, 1.0).values == a.values);
  CHECK(convex_teacher_target(a, b, 0.0).values == b.values);
  for (double v : convex_teacher_target(a, b, 0.5).values.data)
    CHECK(v == doctest::Approx(3.0));

  CHECK_THROWS_AS(convex_teacher_target(a, b, 1.5), LambdaOutOfRange);
  CHECK_THROWS_AS(convex_teacher_target(a, b, -0.1), LambdaOutOfRange);
  FrameEmbedding c = embedding_of({1, 1}, 2, 1);
  CHECK_THROWS_AS(convex_teacher_target(a, c, 0.5), ShapeMismatch);
}

TEST_CASE("convex combination is exactly linear in lambda") {
  Rng rng(5);
  FrameEmbedding a = embedding_of({}, 0, 0);
  FrameEmbedding b = embedding_of({}, 0, 0);
  a.values = Matrix(6, 3);
  b.values = Matrix(6, 3);
  for (double& v : a.values.data) v = rng.gaussian();
  for (double& v : b.values.data) v = rng.gaussian();
  FrameEmbedding at1 = convex_teacher_target(a, b, 1.0);
  FrameEmbedding at0 = convex_teacher_target(a, b, 0.0);
  for (double lambda : {0.25, 0.5, 0.9}) {
    FrameEmbedding mid = convex_teacher_target(a, b, lambda);
    for (size_t i = 0; i < mid.values.data.size(); ++i)
      CHECK(mid.values.data[i] ==
            doctest::Approx(lambda * at1.values.data[i] +
                            (1 - lambda) * at0.values.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("mixture mse values and gradient") {
  FrameEmbedding s = embedding_of({0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, 8, 1);
  FrameEmbedding t = embedding_of({0, 0, 0, 0, 0, 0, 0, 0}, 8, 1);
  MseResult r = mixture_mse(s, t);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));  // 8 * 0.25
  for (double g : r.grad_student.data) CHECK(g == doctest::Approx(1.0));

  MseResult zero = mixture_mse(t, t);
  CHECK(zero.value == 0.0);
  for (double g : zero.grad_student.data) CHECK(g == 0.0);

  CHECK(mixture_mse(s, t).value == mixture_mse(t, s).value);

  MseResult mean = mixture_mse(s, t, MseReduce::kMean);
  CHECK(mean.value == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("combined loss is the weighted sum") {
  LossWeights w;
  w.alpha = 1.0;
  w.beta = 0.0;
  CHECK(combined_loss(3.5, 99.0, w) == 3.5);  // tagging only
  w.alpha = 0.0;
  w.beta = 1.0;
  CHECK(combined_loss(99.0, 2.5, w) == 2.5);  // mixture only
  w.alpha = 1.0;
  w.beta = 1.0;
  CHECK(combined_loss(2.0, 3.0, w) == 5.0);

  // linear in each component
  w.alpha = 0.7;
  w.beta = 1.3;
  double base = combined_loss(1.0, 1.0, w);
  CHECK(combined_loss(2.0, 1.0, w) - base == doctest::Approx(0.7));
  CHECK(combined_loss(1.0, 2.0, w) - base == doctest::Approx(1.3));
}

TEST_CASE("linear mixup combines features and labels with the same gamma") {
  MelFeatures f1, f2;
  f1.values = Matrix(2, 2);
  f2.values = Matrix(2, 2);
  for (size_t i = 0; i < 4; ++i) {
    f1.values.data[i] = 1.0;
    f2.values.data[i] = 3.0;
  }
  LabelVector y1 = make_label(3, 0, {0});
  LabelVector y2 = make_label(3, 0, {1});
  Rng rng(8);
  LinearMixupResult r = linear_mixup(f1, y1, f2, y2, 1.0, rng);
  CHECK(r.gamma >= 0.0);
  CHECK(r.gamma <= 1.0);
  for (double v : r.features.values.data)
    CHECK(v == doctest::Approx(r.gamma * 1.0 + (1 - r.gamma) * 3.0).epsilon(1e-12));
  CHECK(r.soft_targets[0] == doctest::Approx(r.gamma));
  CHECK(r.soft_targets[1] == doctest::Approx(1.0 - r.gamma));
  CHECK(r.soft_targets[2] == 0.0);
}

TEST_CASE("Beta(1,1) draws are uniform (Kolmogorov-Smirnov, alpha = 0.01)") {
  Rng rng(314159);
  const int n = 10000;
  std::vector<double> draws(n);
  for (double& d : draws) d = sample_beta(1.0, rng);
  std::sort(draws.begin(), draws.end());
  double dmax = 0.0;
  for (int i = 0; i < n; ++i) {
    double f = static_cast<double>(i + 1) / n;
    double f0 = static_cast<double>(i) / n;
    dmax = std::max({dmax, std::abs(f - draws[i]), std::abs(draws[i] - f0)});
  }
  // critical value at alpha = 0.01: 1.628/sqrt(n)
  CHECK(dmax < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("snr mixup ORs the labels and mixes at unit noise power") {
  Waveform x1({1, -1, 1, -1}, kSampleRate);
  Waveform x2({-1, 1, -1, 1}, kSampleRate);
  LabelVector y1 = make_label(8, 2, {3});
  LabelVector y2 = make_label(8, 2, {8 + 1});
  SnrMixupResult r = snr_mixup(x1, y1, x2, y2, 0.0);
  CHECK(r.target.values[3] == 1);
  CHECK(r.target.values[9] == 1);
  int set = 0;
  for (uint8_t v : r.target.values) set += v;
  CHECK(set == 2);
  // unit powers at 0 dB: plain sum
  for (size_t i = 0; i < x1.samples.size(); ++i)
    CHECK(r.mix.mixture.samples[i] == x1.samples[i] + x2.samples[i]);

  SnrMixupResult same = snr_mixup(x1, y1, x2, y1, 0.0);
  CHECK(same.target.values == y1.values);
}

}  // TEST_SUITE
