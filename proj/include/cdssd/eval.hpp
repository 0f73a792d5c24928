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

#include <map>
#include <string>
#include <vector>

#include "cdssd/inference.hpp"

namespace cdssd {

struct GtBox {
  Box box;
  int class_id = 0;
  std::string image_id;
};

std::vector<GtBox> flatten_ground_truth(const std::vector<Annotation>& annotations);

struct PRPoint {
  double score = 0, precision = 0, recall = 0;
};

/// Precision-recall curve of one class. `defined` is false when the class has
/// no ground truth (AP is skipped, not zero). AP is the all-point
/// interpolated area under the curve.
struct PRCurve {
  int class_id = 0;
  std::vector<PRPoint> points;
  double ap = 0.0;
  bool defined = false;
  int num_gt = 0;
};

/// Greedy matching per image: detections in descending score order (ties by
/// image_id, then input order) match the highest-IoU unmatched ground truth
/// of their class with IoU >= iou_min.
PRCurve average_precision(const std::vector<Detection>& dets, const std::vector<GtBox>& gts,
                          int class_id, double iou_min = 0.5);

/// Unweighted mean AP over the classes present in the ground truth; classes
/// without ground truth are excluded from the mean.
double mean_ap(const std::vector<Detection>& dets, const std::vector<GtBox>& gts,
               const std::vector<int>& class_ids, double iou_min = 0.5,
               std::map<int, PRCurve>* per_class = nullptr);

/// For each recall level: the maximum precision achieved at any recall >= r,
/// 0 when the curve never reaches r.
std::vector<double> precision_at_recall(const PRCurve& curve,
                                        const std::vector<double>& levels = {0.5, 0.7, 0.9});

/// Interpolated area under the curve restricted to recall >= min_recall,
/// normalized by (1 - min_recall).
double ap_above_recall(const PRCurve& curve, double min_recall);

struct EvalReport {
  double map = 0.0;
  double iou_min = 0.5;
  std::vector<int> class_ids;
  std::map<int, PRCurve> curves;
  std::vector<double> recall_levels = {0.5, 0.7, 0.9};
  double mean_ap_at_recall70 = 0.0;  // mean over defined classes of ap_above_recall(0.7)
};

EvalReport evaluate(const std::vector<Detection>& dets, const std::vector<GtBox>& gts,
                    const ClassMap& classes, double iou_min = 0.5);

/// Aligned text report: per-class AP blocks of up to 12 columns, then the
/// precision-at-recall table.
std::string report_text(const EvalReport& report, const ClassMap& classes);

/// The same report as a JSON document.
std::string report_json(const EvalReport& report, const ClassMap& classes);

}  // namespace cdssd
