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

#include "cdssd/targets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cdssd {

MatchResult match_anchors(const AnchorSet& anchors, const std::vector<LabeledBox>& gts,
                          double threshold) {
  const int a_count = static_cast<int>(anchors.boxes.size());
  if (a_count == 0) throw std::invalid_argument("match_anchors: empty anchor set");
  if (threshold <= 0.0 || threshold >= 1.0) {
    throw std::invalid_argument("match_anchors: threshold must be in (0,1)");
  }

  MatchResult res;
  res.matched_gt.assign(a_count, -1);
  res.class_target.assign(a_count, 0);
  res.offset_target.assign(a_count, {0, 0, 0, 0});
  res.is_positive.assign(a_count, 0);
  if (gts.empty()) return res;

  const int g_count = static_cast<int>(gts.size());

  // Threshold rule: per-anchor argmax over ground truths.
  for (int a = 0; a < a_count; ++a) {
    double best = 0.0;
    int best_g = -1;
    for (int g = 0; g < g_count; ++g) {
      const double v = iou(anchors.boxes[a], gts[g].box);
      if (v > best) {
        best = v;
        best_g = g;
      }
    }
    if (best_g >= 0 && best > threshold) res.matched_gt[a] = best_g;
  }

  // Forcing rule: each ground truth claims its best anchor, in gt order.
  for (int g = 0; g < g_count; ++g) {
    double best = -1.0;
    int best_a = -1;
    for (int a = 0; a < a_count; ++a) {
      const double v = iou(anchors.boxes[a], gts[g].box);
      if (v > best) {
        best = v;
        best_a = a;
      }
    }
    res.matched_gt[best_a] = g;
  }

  for (int a = 0; a < a_count; ++a) {
    const int g = res.matched_gt[a];
    if (g < 0) continue;
    res.is_positive[a] = 1;
    res.class_target[a] = gts[g].class_id;
    res.offset_target[a] = encode_offsets(gts[g].box, anchors.boxes[a]);
    ++res.num_positives;
  }
  return res;
}

std::array<double, 4> encode_offsets(const Box& gt, const Box& anchor) {
  if (gt.w <= 0.0 || gt.h <= 0.0 || anchor.w <= 0.0 || anchor.h <= 0.0) {
    throw std::invalid_argument("encode_offsets: boxes must have positive dimensions");
  }
  return {(gt.cx - anchor.cx) / anchor.w, (gt.cy - anchor.cy) / anchor.h,
          std::log(gt.w / anchor.w), std::log(gt.h / anchor.h)};
}

Box decode_offsets(const std::array<double, 4>& t, const Box& anchor) {
  Box b;
  b.cx = anchor.cx + t[0] * anchor.w;
  b.cy = anchor.cy + t[1] * anchor.h;
  b.w = anchor.w * std::exp(t[2]);
  b.h = anchor.h * std::exp(t[3]);
  return clip_box(b);
}

std::vector<int> hard_negative_mine(const std::vector<double>& conf_loss,
                                    const MatchResult& match, double ratio) {
  if (ratio <= 0.0) throw std::invalid_argument("hard_negative_mine: ratio must be > 0");
  std::vector<int> negatives;
  negatives.reserve(conf_loss.size());
  for (size_t a = 0; a < conf_loss.size(); ++a) {
    if (!match.is_positive[a]) negatives.push_back(static_cast<int>(a));
  }
  if (negatives.empty()) return {};

  size_t want = match.num_positives > 0
                    ? static_cast<size_t>(ratio * match.num_positives)
                    : 1;
  want = std::min(want, negatives.size());

  std::sort(negatives.begin(), negatives.end(), [&](int a, int b) {
    if (conf_loss[a] != conf_loss[b]) return conf_loss[a] > conf_loss[b];
    return a < b;
  });
  negatives.resize(want);
  return negatives;
}

namespace {

inline double smooth_l1(double d) {
  const double ad = std::abs(d);
  return ad < 1.0 ? 0.5 * d * d : ad - 0.5;
}

inline double smooth_l1_grad(double d) { return std::clamp(d, -1.0, 1.0); }

}  // namespace

LossReport detection_loss(const Tensor& class_logits, const Tensor& offsets,
                          const MatchResult& match, double neg_ratio,
                          Tensor* dlogits, Tensor* doffsets) {
  const int a_count = match.num_anchors();
  if (class_logits.rank() != 2 || class_logits.dim(0) != a_count) {
    throw std::invalid_argument("detection_loss: logits must be [A,C+1] with A = anchor count");
  }
  if (offsets.rank() != 2 || offsets.dim(0) != a_count || offsets.dim(1) != 4) {
    throw std::invalid_argument("detection_loss: offsets must be [A,4]");
  }
  require_finite(class_logits, "detection_loss logits");
  const int num_classes1 = class_logits.dim(1);

  // Per-anchor softmax cross-entropy against the matched target (background
  // for negatives); negatives are then mined by this loss.
  std::vector<double> ce(a_count);
  std::vector<double> log_z(a_count);
  for (int a = 0; a < a_count; ++a) {
    const double* row = class_logits.data.data() + static_cast<size_t>(a) * num_classes1;
    double m = row[0];
    for (int j = 1; j < num_classes1; ++j) m = std::max(m, row[j]);
    double z = 0.0;
    for (int j = 0; j < num_classes1; ++j) z += std::exp(row[j] - m);
    log_z[a] = m + std::log(z);
    ce[a] = log_z[a] - row[match.class_target[a]];
  }

  const std::vector<int> mined = hard_negative_mine(ce, match, neg_ratio);

  LossReport report;
  report.num_positives = match.num_positives;
  report.num_mined_negatives = static_cast<int>(mined.size());
  const double norm = std::max(1, match.num_positives);

  std::vector<uint8_t> in_conf(a_count, 0);
  for (int a = 0; a < a_count; ++a) {
    if (match.is_positive[a]) in_conf[a] = 1;
  }
  for (int a : mined) in_conf[a] = 1;

  double loc = 0.0, conf = 0.0;
  for (int a = 0; a < a_count; ++a) {
    if (match.is_positive[a]) {
      for (int j = 0; j < 4; ++j) {
        loc += smooth_l1(offsets.at(a, j) - match.offset_target[a][j]);
      }
    }
    if (in_conf[a]) conf += ce[a];
  }
  report.localization = loc / norm;
  report.confidence = conf / norm;
  report.total = report.localization + report.confidence;

  if (dlogits) {
    if (dlogits->shape != class_logits.shape) *dlogits = Tensor(class_logits.shape);
    for (int a = 0; a < a_count; ++a) {
      double* out = dlogits->data.data() + static_cast<size_t>(a) * num_classes1;
      if (!in_conf[a]) {
        std::fill(out, out + num_classes1, 0.0);
        continue;
      }
      const double* row = class_logits.data.data() + static_cast<size_t>(a) * num_classes1;
      for (int j = 0; j < num_classes1; ++j) {
        const double p = std::exp(row[j] - log_z[a]);
        out[j] = (p - (j == match.class_target[a] ? 1.0 : 0.0)) / norm;
      }
    }
  }
  if (doffsets) {
    if (doffsets->shape != offsets.shape) *doffsets = Tensor(offsets.shape);
    for (int a = 0; a < a_count; ++a) {
      double* out = doffsets->data.data() + static_cast<size_t>(a) * 4;
      if (!match.is_positive[a]) {
        std::fill(out, out + 4, 0.0);
        continue;
      }
      for (int j = 0; j < 4; ++j) {
        out[j] = smooth_l1_grad(offsets.at(a, j) - match.offset_target[a][j]) / norm;
      }
    }
  }
  return report;
}

}  // namespace cdssd
