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

#include "cdssd/box.hpp"

namespace cdssd {

/// Geometry of one prediction layer: an m x n feature map carrying K default
/// boxes per box-pooled cell at a given scale.
struct FeatureMapSpec {
  int layer_index = 0;
  int m = 0;  // rows
  int n = 0;  // cols
  int K = 0;  // default boxes per cell
  double scale = 0.0;
  int box_pool_k = 1;

  int pooled_rows() const { return (m + box_pool_k - 1) / box_pool_k; }
  int pooled_cols() const { return (n + box_pool_k - 1) / box_pool_k; }
  int anchor_count() const { return pooled_rows() * pooled_cols() * K; }
};

/// All default boxes of a network, layer-major then row, col, ratio index.
struct AnchorSet {
  std::vector<Box> boxes;
  std::vector<FeatureMapSpec> layout;
  std::vector<double> aspect_ratios;
};

/// How a bin's aspect ratio b turns into box sides at a layer scale s.
///   kSqrt:        w = s*sqrt(b), h = s/sqrt(b)   (w/h == b)
///   kCellLiteral: w = h = s*b (the m- and n-proportional rule normalized by
///                 the map dimensions; kept for comparison, both sides scale
///                 with b so the ratio degenerates to 1)
enum class AspectMode { kSqrt, kCellLiteral };

/// Quantile binning of the ground-truth aspect-ratio distribution: ratios
/// w/h are stably sorted, split into B equal-count bins, and each bin's mean
/// is returned, ascending. Throws when B exceeds the box count or a box has
/// non-positive height.
std::vector<double> compute_aspect_ratio_bins(const std::vector<Box>& gt_boxes, int bins);

/// Default boxes at box-pooled cell centers, K = |ratios| per cell, clipped
/// to the unit square. Pure: identical inputs give bit-identical output.
AnchorSet generate_default_boxes(const std::vector<FeatureMapSpec>& layout,
                                 const std::vector<double>& ratios,
                                 AspectMode mode = AspectMode::kSqrt);

}  // namespace cdssd
