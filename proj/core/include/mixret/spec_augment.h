// core/include/mixret/spec_augment.h

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

#ifndef MIXRET_SPEC_AUGMENT_H_
#define MIXRET_SPEC_AUGMENT_H_

#include <cstdint>

#include "mixret/logmel.h"

namespace mixret {

struct SpecAugmentConfig {
  int n_time_masks = 2;
  int max_time_width = 64;   // frames
  int n_freq_masks = 2;
  int max_freq_width = 16;   // mel bins
};

// Masks n_time_masks time stripes and n_freq_masks frequency stripes, widths
// drawn uniformly in [0, max]; masked cells are set to the pre-mask matrix
// mean. Deterministic per seed; width-0 masks leave the input unchanged.
// Requires t_frames > max_time_width.
MelFeatures spec_augment(const MelFeatures& f, uint64_t seed,
                         const SpecAugmentConfig& config = SpecAugmentConfig());

}  // namespace mixret

#endif  // MIXRET_SPEC_AUGMENT_H_
