// Brute-force oracles for the randomized comparison tests. Each one is an
// independent, direct implementation of the operation's definition; none of
// them share code with the library path they check.

#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "cdssd/anchors.hpp"
#include "cdssd/eval.hpp"
#include "cdssd/targets.hpp"

namespace oracles {

/// IoU by counting pixels on an n x n raster of the unit square.
inline double iou_rasterized(const cdssd::Box& a, const cdssd::Box& b, int n = 1000) {
  auto inside = [n](const cdssd::Box& box, int px, int py) {
    const double x = (px + 0.5) / n, y = (py + 0.5) / n;
    return x >= box.x0() && x <= box.x1() && y >= box.y0() && y <= box.y1();
  };
  long inter = 0, uni = 0;
  for (int py = 0; py < n; ++py) {
    for (int px = 0; px < n; ++px) {
      const bool ia = inside(a, px, py), ib = inside(b, px, py);
      if (ia && ib) ++inter;
      if (ia || ib) ++uni;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

/// Anchor matching from the full IoU matrix: per-anchor argmax thresholding,
/// then per-gt best-anchor forcing in gt order.
struct MatchOracle {
  std::vector<int> matched_gt;
  std::vector<int> class_target;
};

inline MatchOracle match_oracle(const std::vector<cdssd::Box>& anchors,
                                const std::vector<cdssd::LabeledBox>& gts, double threshold) {
  const int a_n = static_cast<int>(anchors.size());
  const int g_n = static_cast<int>(gts.size());
  std::vector<std::vector<double>> m(static_cast<size_t>(a_n), std::vector<double>(static_cast<size_t>(g_n)));
  for (int a = 0; a < a_n; ++a) {
    for (int g = 0; g < g_n; ++g) m[a][g] = cdssd::iou(anchors[a], gts[g].box);
  }
  MatchOracle res;
  res.matched_gt.assign(a_n, -1);
  res.class_target.assign(a_n, 0);
  for (int a = 0; a < a_n; ++a) {
    int best_g = -1;
    double best = 0;
    for (int g = 0; g < g_n; ++g) {
      if (m[a][g] > best) {
        best = m[a][g];
        best_g = g;
      }
    }
    if (best_g >= 0 && best > threshold) res.matched_gt[a] = best_g;
  }
  for (int g = 0; g < g_n; ++g) {
    int best_a = 0;
    for (int a = 1; a < a_n; ++a) {
      if (m[a][g] > m[best_a][g]) best_a = a;
    }
    res.matched_gt[best_a] = g;
  }
  for (int a = 0; a < a_n; ++a) {
    if (res.matched_gt[a] >= 0) res.class_target[a] = gts[res.matched_gt[a]].class_id;
  }
  return res;
}

/// NMS by repeated full scans over the surviving set.
inline std::vector<int> nms_oracle(const std::vector<cdssd::Box>& boxes,
                                   const std::vector<double>& scores, double threshold) {
  std::vector<int> alive(boxes.size());
  for (size_t i = 0; i < boxes.size(); ++i) alive[i] = static_cast<int>(i);
  std::vector<int> kept;
  while (!alive.empty()) {
    int best = alive[0];
    for (int i : alive) {
      if (scores[i] > scores[best] || (scores[i] == scores[best] && i < best)) best = i;
    }
    kept.push_back(best);
    std::vector<int> next;
    for (int i : alive) {
      if (i != best && cdssd::iou(boxes[best], boxes[i]) <= threshold) next.push_back(i);
    }
    alive = std::move(next);
  }
  return kept;
}

/// Hard-negative selection by a full stable sort.
inline std::vector<int> mining_oracle(const std::vector<double>& losses,
                                      const std::vector<uint8_t>& is_positive, int num_positives,
                                      double ratio) {
  std::vector<int> negatives;
  for (size_t i = 0; i < losses.size(); ++i) {
    if (!is_positive[i]) negatives.push_back(static_cast<int>(i));
  }
  std::stable_sort(negatives.begin(), negatives.end(), [&](int a, int b) {
    if (losses[a] != losses[b]) return losses[a] > losses[b];
    return a < b;
  });
  size_t want = num_positives > 0 ? static_cast<size_t>(ratio * num_positives)
                                  : std::min<size_t>(1, negatives.size());
  want = std::min(want, negatives.size());
  negatives.resize(want);
  return negatives;
}

/// AP by enumerating every threshold cut: for each prefix of the score-sorted
/// detections, re-run greedy matching from scratch and record (P,R); then
/// integrate max-precision-to-the-right over the recall increments.
inline double ap_threshold_enumeration(std::vector<cdssd::Detection> dets,
                                       const std::vector<cdssd::GtBox>& gts, int class_id,
                                       double iou_min) {
  std::vector<cdssd::Detection> cls_dets;
  for (const auto& d : dets) {
    if (d.class_id == class_id) cls_dets.push_back(d);
  }
  std::stable_sort(cls_dets.begin(), cls_dets.end(),
                   [](const cdssd::Detection& a, const cdssd::Detection& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.image_id < b.image_id;
                   });
  int num_gt = 0;
  for (const auto& g : gts) {
    if (g.class_id == class_id) ++num_gt;
  }
  if (num_gt == 0) return -1.0;

  auto pr_at_cut = [&](size_t cut) {
    std::map<std::string, std::vector<uint8_t>> used;
    int tp = 0;
    for (size_t i = 0; i < cut; ++i) {
      const auto& det = cls_dets[i];
      std::vector<const cdssd::GtBox*> candidates;
      for (const auto& g : gts) {
        if (g.class_id == class_id && g.image_id == det.image_id) candidates.push_back(&g);
      }
      auto& flags = used[det.image_id];
      flags.resize(candidates.size(), 0);
      int best = -1;
      double best_iou = 0;
      for (size_t c = 0; c < candidates.size(); ++c) {
        if (flags[c]) continue;
        const double v = cdssd::iou(det.box, candidates[c]->box);
        if (v > best_iou) {
          best_iou = v;
          best = static_cast<int>(c);
        }
      }
      if (best >= 0 && best_iou >= iou_min) {
        flags[static_cast<size_t>(best)] = 1;
        ++tp;
      }
    }
    const double precision = cut == 0 ? 0.0 : static_cast<double>(tp) / cut;
    const double recall = static_cast<double>(tp) / num_gt;
    return std::pair<double, double>(precision, recall);
  };

  std::vector<double> precisions, recalls;
  for (size_t cut = 1; cut <= cls_dets.size(); ++cut) {
    const auto [p, r] = pr_at_cut(cut);
    precisions.push_back(p);
    recalls.push_back(r);
  }
  double ap = 0.0, prev_recall = 0.0;
  for (size_t i = 0; i < precisions.size(); ++i) {
    double pmax = 0.0;
    for (size_t j = i; j < precisions.size(); ++j) pmax = std::max(pmax, precisions[j]);
    ap += (recalls[i] - prev_recall) * pmax;
    prev_recall = recalls[i];
  }
  return ap;
}

}  // namespace oracles
