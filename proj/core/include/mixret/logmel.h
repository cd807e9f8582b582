// core/include/mixret/logmel.h

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

#ifndef MIXRET_LOGMEL_H_
#define MIXRET_LOGMEL_H_

#include <string>
#include <vector>

#include "mixret/wave.h"

namespace mixret {

// Feature front-end constants. 25 ms Povey window, 10 ms shift, 128
// triangular mel bins spanning 20 Hz - 8 kHz, natural-log energies floored at
// log(1e-10). The Povey window is (0.5 - 0.5 cos(2 pi n/(N-1)))^0.85.
constexpr int kNumMels = 128;
constexpr int kWindowMs = 25;
constexpr int kFrameShiftMs = 10;
constexpr double kMelLowHz = 20.0;
constexpr double kMelHighHz = 8000.0;
constexpr double kLogEnergyFloor = 1e-10;

struct MelFeatures {
  Matrix values;  // t_frames x kNumMels
  int frame_shift_ms = kFrameShiftMs;
  int window_ms = kWindowMs;

  int t_frames() const { return values.rows; }
  int n_mels() const { return values.cols; }
};

// Frame count is 1 + floor((n_samples - window)/shift); no padding. Throws
// TooShort when the waveform cannot fill one window, RateMismatch when the
// rate is not 16 kHz.
MelFeatures extract_logmel(const Waveform& w);

// Center frequency (Hz) of one mel bin; exposed for tests probing tone
// placement.
double mel_bin_center_hz(int bin);

// Global scalar corpus statistics.
struct NormStats {
  double mean = 0.0;
  double std = 1.0;
};

// Fits (mean, std) over every cell of every matrix. Throws DegenerateStats
// when the corpus has zero variance.
NormStats fit_norm(const std::vector<MelFeatures>& corpus);
MelFeatures apply_norm(const MelFeatures& f, const NormStats& stats);

// Little-endian float32 binary + JSON sidecar ({t_frames, n_mels,
// frame_shift_ms, window_ms}) at path and path + ".json".
void save_features(const MelFeatures& f, const std::string& path);
MelFeatures load_features(const std::string& path);

}  // namespace mixret

#endif  // MIXRET_LOGMEL_H_
