// core/src/logmel.cc

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

#include "mixret/logmel.h"

#include <cmath>
#include <complex>
#include <fstream>

#include "json.hpp"

namespace mixret {

namespace {

constexpr int kFftSize = 512;  // next power of two above the 400-sample window
constexpr double kTwoPi = 6.283185307179586476925287;

double hz_to_mel(double hz) { return 1127.0 * std::log1p(hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); }

// In-place iterative radix-2 complex FFT; n must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a) {
  const int n = static_cast<int>(a.size());
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    double ang = -kTwoPi / len;
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (int k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

struct MelBanks {
  // per bin: first FFT bin index and triangle weights
  std::vector<int> first;
  std::vector<std::vector<double>> weights;
  std::vector<double> center_hz;

  MelBanks() {
    const double mel_lo = hz_to_mel(kMelLowHz);
    const double mel_hi = hz_to_mel(kMelHighHz);
    const double delta = (mel_hi - mel_lo) / (kNumMels + 1);
    const int n_freq = kFftSize / 2 + 1;
    const double hz_per_bin = static_cast<double>(kSampleRate) / kFftSize;
    first.resize(kNumMels);
    weights.resize(kNumMels);
    center_hz.resize(kNumMels);
    for (int m = 0; m < kNumMels; ++m) {
      double left = mel_lo + m * delta;
      double center = left + delta;
      double right = center + delta;
      center_hz[m] = mel_to_hz(center);
      int lo = -1;
      std::vector<double> w;
      for (int j = 0; j < n_freq; ++j) {
        double mel = hz_to_mel(j * hz_per_bin);
        if (mel <= left || mel >= right) continue;
        double weight = mel <= center ? (mel - left) / (center - left)
                                      : (right - mel) / (right - center);
        if (lo < 0) lo = j;
        w.push_back(weight);
      }
      first[m] = lo < 0 ? 0 : lo;
      weights[m] = std::move(w);
    }
  }
};

const MelBanks& mel_banks() {
  static const MelBanks banks;
  return banks;
}

}  // namespace

double mel_bin_center_hz(int bin) { return mel_banks().center_hz.at(bin); }

MelFeatures extract_logmel(const Waveform& w) {
  if (w.sample_rate != kSampleRate)
    throw RateMismatch("extract_logmel: expected 16 kHz input");
  const int window = kSampleRate / 1000 * kWindowMs;   // 400
  const int shift = kSampleRate / 1000 * kFrameShiftMs;  // 160
  const int n = static_cast<int>(w.samples.size());
  if (n < window) throw TooShort("extract_logmel: waveform shorter than one window");
  const int t_frames = 1 + (n - window) / shift;

  // Povey window
  std::vector<double> win(window);
  for (int i = 0; i < window; ++i) {
    double hann = 0.5 - 0.5 * std::cos(kTwoPi * i / (window - 1));
    win[i] = std::pow(hann, 0.85);
  }

  const MelBanks& banks = mel_banks();
  MelFeatures out;
  out.values = Matrix(t_frames, kNumMels);
  std::vector<std::complex<double>> buf(kFftSize);
  std::vector<double> power(kFftSize / 2 + 1);
  for (int t = 0; t < t_frames; ++t) {
    const double* frame = w.samples.data() + static_cast<size_t>(t) * shift;
    for (int i = 0; i < window; ++i) buf[i] = frame[i] * win[i];
    for (int i = window; i < kFftSize; ++i) buf[i] = 0.0;
    fft_inplace(buf);
    for (int j = 0; j <= kFftSize / 2; ++j) power[j] = std::norm(buf[j]);
    for (int m = 0; m < kNumMels; ++m) {
      double e = 0.0;
      const auto& ws = banks.weights[m];
      int lo = banks.first[m];
      for (size_t k = 0; k < ws.size(); ++k) e += ws[k] * power[lo + static_cast<int>(k)];
      out.values.at(t, m) = std::log(std::max(e, kLogEnergyFloor));
    }
  }
  return out;
}

NormStats fit_norm(const std::vector<MelFeatures>& corpus) {
  size_t count = 0;
  long double sum = 0.0L;
  for (const MelFeatures& f : corpus) {
    for (double v : f.values.data) sum += v;
    count += f.values.size();
  }
  if (count == 0) throw DegenerateStats("fit_norm: empty corpus");
  long double mean = sum / count;
  long double var = 0.0L;
  for (const MelFeatures& f : corpus) {
    for (double v : f.values.data) {
      long double d = v - mean;
      var += d * d;
    }
  }
  var /= count;
  if (var <= 0.0L) throw DegenerateStats("fit_norm: zero-variance corpus");
  NormStats stats;
  stats.mean = static_cast<double>(mean);
  stats.std = static_cast<double>(std::sqrt(static_cast<double>(var)));
  return stats;
}

MelFeatures apply_norm(const MelFeatures& f, const NormStats& stats) {
  if (stats.std <= 0.0) throw DegenerateStats("apply_norm: std must be > 0");
  MelFeatures out = f;
  for (double& v : out.values.data) v = (v - stats.mean) / stats.std;
  return out;
}

void save_features(const MelFeatures& f, const std::string& path) {
  {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoFailure("save_features: cannot open " + path);
    for (double v : f.values.data) {
      float x = static_cast<float>(v);
      os.write(reinterpret_cast<const char*>(&x), sizeof(float));
    }
    if (!os) throw IoFailure("save_features: short write to " + path);
  }
  nlohmann::json j = {{"t_frames", f.values.rows},
                      {"n_mels", f.values.cols},
                      {"frame_shift_ms", f.frame_shift_ms},
                      {"window_ms", f.window_ms}};
  std::ofstream js(path + ".json");
  if (!js) throw IoFailure("save_features: cannot open " + path + ".json");
  js << j.dump(2) << "\n";
}

MelFeatures load_features(const std::string& path) {
  std::ifstream js(path + ".json");
  if (!js) throw IoFailure("load_features: missing sidecar " + path + ".json");
  nlohmann::json j = nlohmann::json::parse(js);
  MelFeatures f;
  int rows = j.at("t_frames").get<int>();
  int cols = j.at("n_mels").get<int>();
  f.frame_shift_ms = j.at("frame_shift_ms").get<int>();
  f.window_ms = j.at("window_ms").get<int>();
  f.values = Matrix(rows, cols);
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("load_features: cannot open " + path);
  for (double& v : f.values.data) {
    float x = 0.0f;
    is.read(reinterpret_cast<char*>(&x), sizeof(float));
    v = x;
  }
  if (!is) throw IoFailure("load_features: short read from " + path);
  return f;
}

}  // namespace mixret
