// core/src/spec_augment.cc

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

#include "mixret/spec_augment.h"

namespace mixret {

MelFeatures spec_augment(const MelFeatures& f, uint64_t seed,
                         const SpecAugmentConfig& config) {
  const int t = f.values.rows;
  const int n_mels = f.values.cols;
  if (t <= config.max_time_width)
    throw TooShort("spec_augment: t_frames must exceed max_time_width");

  Rng rng(seed);
  MelFeatures out = f;
  const double fill = f.values.mean();

  for (int m = 0; m < config.n_time_masks; ++m) {
    int width = rng.uniform_int(0, config.max_time_width);
    if (width == 0) continue;
    int start = rng.uniform_int(0, t - width);
    for (int r = start; r < start + width; ++r)
      for (int c = 0; c < n_mels; ++c) out.values.at(r, c) = fill;
  }
  for (int m = 0; m < config.n_freq_masks; ++m) {
    int width = rng.uniform_int(0, std::min(config.max_freq_width, n_mels));
    if (width == 0) continue;
    int start = rng.uniform_int(0, n_mels - width);
    for (int r = 0; r < t; ++r)
      for (int c = start; c < start + width; ++c) out.values.at(r, c) = fill;
  }
  return out;
}

}  // namespace mixret
