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

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "cdssd/anchors.hpp"
#include "cdssd/tensor.hpp"

namespace cdssd {

struct LabeledBox {
  Box box;
  int class_id = 0;  // 1..C; 0 is background and never appears in ground truth
};

/// Per-anchor assignment produced by match_anchors.
struct MatchResult {
  std::vector<int> matched_gt;                     // -1 when unmatched
  std::vector<int> class_target;                   // 0 = background
  std::vector<std::array<double, 4>> offset_target;
  std::vector<uint8_t> is_positive;
  int num_positives = 0;

  int num_anchors() const { return static_cast<int>(matched_gt.size()); }
};

/// Matches anchors to ground truth. Rules, in order:
///  1. every anchor whose best-IoU ground truth exceeds `threshold` is
///     positive for that ground truth (argmax ties broken by lower gt index);
///  2. each ground truth additionally forces its best-IoU anchor positive,
///     even below threshold (ties by lower anchor index; processed in gt
///     order, later assignments win a contested anchor).
/// Empty gts yields an all-negative result; an empty anchor set throws.
MatchResult match_anchors(const AnchorSet& anchors, const std::vector<LabeledBox>& gts,
                          double threshold);

/// SSD offset encoding: ((gx-ax)/aw, (gy-ay)/ah, ln(gw/aw), ln(gh/ah)).
std::array<double, 4> encode_offsets(const Box& gt, const Box& anchor);

/// Inverse of encode_offsets, clipped to the unit square.
Box decode_offsets(const std::array<double, 4>& t, const Box& anchor);

/// Picks the floor(ratio * num_positives) negative anchors with the largest
/// confidence loss (ties by lower index), capped by availability. When there
/// are no positives, returns the single highest-loss negative so background
/// still trains. Returned indices are ordered by descending loss.
std::vector<int> hard_negative_mine(const std::vector<double>& conf_loss,
                                    const MatchResult& match, double ratio = 2.0);

struct LossReport {
  double localization = 0.0;
  double confidence = 0.0;
  double total = 0.0;
  int num_positives = 0;
  int num_mined_negatives = 0;
};

/// Joint detection loss: smooth-L1 over positive offsets plus softmax
/// cross-entropy over positives and mined negatives, both normalized by
/// max(1, num_positives). When dlogits/doffsets are given they receive the
/// loss gradients (same shapes as the inputs). Throws on non-finite logits.
LossReport detection_loss(const Tensor& class_logits, const Tensor& offsets,
                          const MatchResult& match, double neg_ratio = 2.0,
                          Tensor* dlogits = nullptr, Tensor* doffsets = nullptr);

}  // namespace cdssd
