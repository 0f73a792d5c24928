/*
 * Copyright 2026 the cdssd authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <vector>

#include "cdssd/rng.hpp"
#include "cdssd/targets.hpp"
#include "cdssd/tensor.hpp"

namespace cdssd {

struct AugmentConfig {
  bool crop = true;
  std::vector<double> min_ious = {0.5, 0.7, 0.9};  // one branch each, plus no-crop
  double patch_scale_min = 0.5, patch_scale_max = 1.0;  // fraction of image area
  double patch_aspect_min = 1.0, patch_aspect_max = 2.0;
  int patch_attempts = 50;
  double flip_prob = 0.5;
  double blackout_frac = 0.2;
  double blackout_prob = 0.25;
  bool blur = true, emboss = true, edge = true, color_jitter = true;
  double photometric_prob = 0.25;
  double color_jitter_strength = 0.2;  // +-20% hue/saturation/contrast

  void validate() const;
};

struct Sample {
  Tensor image;  // [3,S,S]
  std::vector<LabeledBox> gts;
};

/// Patch sampling: picks uniformly among no-crop and one minimum-IoU branch
/// per configured level, then rejection-samples up to patch_attempts patches
/// (area in [scale_min,scale_max], aspect in [aspect_min,aspect_max], either
/// orientation) and accepts the first whose IoU with some ground truth meets
/// the chosen minimum. Ground truths are remapped to patch coordinates;
/// boxes whose center leaves the patch are dropped, the rest are clipped.
/// Falls back to the unchanged sample after patch_attempts failures.
Sample sample_patch(const Sample& in, const AugmentConfig& cfg, Rng& rng);

/// Horizontal mirror: pixels and cx -> 1-cx. An involution.
Sample hflip(const Sample& in);

/// Zeroes an independent `frac` of pixels (all channels).
void blackout(Tensor& image, double frac, Rng& rng);

Tensor gaussian_blur3(const Tensor& image);
Tensor emboss3(const Tensor& image);
/// Edge prominence via unsharp masking: x + 0.5 (x - blur(x)).
Tensor edge_prominence(const Tensor& image);
/// Hue rotation, saturation and contrast jitter, each +-strength.
void color_jitter(Tensor& image, double strength, Rng& rng);

/// Full training-time pipeline: crop, flip, photometric ops, blackout.
/// Deterministic given the rng state; never touches class labels.
Sample augment_sample(const Sample& in, const AugmentConfig& cfg, Rng& rng);

}  // namespace cdssd
