// core/include/mixret/common.h

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

#ifndef MIXRET_COMMON_H_
#define MIXRET_COMMON_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixret {

// ---------------------------------------------------------------------------
// Error taxonomy. Every failure mode a caller can act on has its own type so
// call sites and tests can discriminate without string matching.
// ---------------------------------------------------------------------------
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// audio
class EmptyWaveform : public Error { public: using Error::Error; };
class ZeroPowerComponent : public Error { public: using Error::Error; };
class LengthMismatch : public Error { public: using Error::Error; };
class RateMismatch : public Error { public: using Error::Error; };
class InvalidParams : public Error { public: using Error::Error; };
class UnsupportedFormat : public Error { public: using Error::Error; };
class IoFailure : public Error { public: using Error::Error; };
// features
class TooShort : public Error { public: using Error::Error; };
class DegenerateStats : public Error { public: using Error::Error; };
// encoder
class LayerOutOfRange : public Error { public: using Error::Error; };
class ShapeMismatch : public Error { public: using Error::Error; };
// losses
class LambdaOutOfRange : public Error { public: using Error::Error; };
// trainer
class EmptyClass : public Error { public: using Error::Error; };
class NonFiniteLoss : public Error { public: using Error::Error; };
class CorruptCheckpoint : public Error { public: using Error::Error; };
// scoring
class EmptyStore : public Error { public: using Error::Error; };
class KTooLarge : public Error { public: using Error::Error; };
// metrics
class OneClassOnly : public Error { public: using Error::Error; };
class InvalidP : public Error { public: using Error::Error; };
class ZeroComponent : public Error { public: using Error::Error; };
// bench
class InsufficientNoisePool : public Error { public: using Error::Error; };
class InsufficientMachinePool : public Error { public: using Error::Error; };
// cli
class ConfigError : public Error { public: using Error::Error; };

// ---------------------------------------------------------------------------
// Dense row-major matrix of doubles. Minimal on purpose; all heavy lifting
// happens in module code with explicit loops.
// ---------------------------------------------------------------------------
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // row-major, rows*cols entries

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  bool all_finite() const;
  double mean() const;
};

bool operator==(const Matrix& a, const Matrix& b);

// ---------------------------------------------------------------------------
// Deterministic RNG. mt19937_64 is fully specified by the standard; the
// double/Gaussian conversions below are hand-rolled so that generated streams
// are identical across standard-library implementations (std distributions
// are not pinned by the standard).
// ---------------------------------------------------------------------------
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive. Modulo bias is negligible for the
  // ranges used here (hi - lo << 2^64).
  int uniform_int(int lo, int hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

  // Box-Muller, two uniform draws per sample, no cached spare.
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(6.283185307179586476925287 * u2);
  }

  // Fisher-Yates over [0, n).
  std::vector<int> permutation(int n);

  std::string state() const;
  void set_state(const std::string& s);

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer; used to derive independent sub-seeds.
uint64_t mix_seed(uint64_t x);
uint64_t mix_seed(uint64_t a, uint64_t b);
uint64_t hash_string(const std::string& s);

// FNV-1a over raw bytes; used for checkpoint/manifest integrity checks.
uint64_t fnv1a64(const void* bytes, size_t n, uint64_t h = 0xcbf29ce484222325ull);
uint64_t fnv1a64(const std::vector<double>& v);

// ---------------------------------------------------------------------------
// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work items must write to
// disjoint locations; iteration-to-thread assignment is not deterministic but
// the set of computed items is, so deterministic pipelines store per-index
// results and reduce in index order.
// ---------------------------------------------------------------------------
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace mixret

#endif  // MIXRET_COMMON_H_
