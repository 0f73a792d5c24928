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

#include "cdssd/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cdssd {

std::vector<double> compute_aspect_ratio_bins(const std::vector<Box>& gt_boxes, int bins) {
  if (bins < 1) throw std::invalid_argument("compute_aspect_ratio_bins: bins must be >= 1");
  const int n = static_cast<int>(gt_boxes.size());
  if (bins > n) {
    throw std::invalid_argument("compute_aspect_ratio_bins: " + std::to_string(bins) +
                                " bins requested but only " + std::to_string(n) + " boxes given");
  }
  std::vector<double> ratios(gt_boxes.size());
  for (size_t i = 0; i < gt_boxes.size(); ++i) {
    if (gt_boxes[i].h <= 0.0) throw std::invalid_argument("compute_aspect_ratio_bins: box with non-positive height");
    ratios[i] = gt_boxes[i].w / gt_boxes[i].h;
  }
  std::stable_sort(ratios.begin(), ratios.end());

  std::vector<double> means(bins);
  for (int b = 0; b < bins; ++b) {
    const int lo = static_cast<int>(static_cast<int64_t>(b) * n / bins);
    const int hi = static_cast<int>(static_cast<int64_t>(b + 1) * n / bins);
    double sum = 0.0;
    for (int i = lo; i < hi; ++i) sum += ratios[i];
    means[b] = sum / (hi - lo);
  }
  return means;
}

AnchorSet generate_default_boxes(const std::vector<FeatureMapSpec>& layout,
                                 const std::vector<double>& ratios, AspectMode mode) {
  if (layout.empty()) throw std::invalid_argument("generate_default_boxes: empty layout");
  if (ratios.empty()) throw std::invalid_argument("generate_default_boxes: empty ratios");
  for (const auto& spec : layout) {
    if (spec.m < 1 || spec.n < 1 || spec.K < 1) {
      throw std::invalid_argument("generate_default_boxes: invalid layer geometry");
    }
    if (spec.K != static_cast<int>(ratios.size())) {
      throw std::invalid_argument("generate_default_boxes: layer K must equal ratio count");
    }
    if (spec.box_pool_k < 1 || spec.box_pool_k > 3) {
      throw std::invalid_argument("generate_default_boxes: box_pool_k must be in {1,2,3}");
    }
  }

  AnchorSet set;
  set.layout = layout;
  set.aspect_ratios = ratios;
  int64_t total = 0;
  for (const auto& spec : layout) total += spec.anchor_count();
  set.boxes.reserve(static_cast<size_t>(total));

  for (const auto& spec : layout) {
    const int rows = spec.pooled_rows();
    const int cols = spec.pooled_cols();
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const double cy = (r + 0.5) / rows;
        const double cx = (c + 0.5) / cols;
        for (double b : ratios) {
          double w, h;
          if (mode == AspectMode::kSqrt) {
            w = spec.scale * std::sqrt(b);
            h = spec.scale / std::sqrt(b);
          } else {
            w = spec.scale * b;
            h = spec.scale * b;
          }
          set.boxes.push_back(clip_box(Box{cx, cy, w, h}));
        }
      }
    }
  }
  return set;
}

}  // namespace cdssd
