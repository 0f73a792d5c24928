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

#include "cdssd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace cdssd {

std::vector<GtBox> flatten_ground_truth(const std::vector<Annotation>& annotations) {
  std::vector<GtBox> out;
  for (const auto& ann : annotations) {
    for (const auto& obj : ann.objects) out.push_back({obj.box, obj.class_id, ann.image_id});
  }
  return out;
}

PRCurve average_precision(const std::vector<Detection>& dets, const std::vector<GtBox>& gts,
                          int class_id, double iou_min) {
  PRCurve curve;
  curve.class_id = class_id;

  // Ground truths of this class, grouped per image.
  std::map<std::string, std::vector<const GtBox*>> gt_by_image;
  int num_gt = 0;
  for (const auto& gt : gts) {
    if (gt.class_id != class_id) continue;
    gt_by_image[gt.image_id].push_back(&gt);
    ++num_gt;
  }
  curve.num_gt = num_gt;
  if (num_gt == 0) return curve;  // AP undefined: reported as skipped, not zero
  curve.defined = true;

  struct Cand {
    const Detection* det;
    size_t order;
  };
  std::vector<Cand> cands;
  for (size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].class_id == class_id) cands.push_back({&dets[i], i});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.det->score != b.det->score) return a.det->score > b.det->score;
    if (a.det->image_id != b.det->image_id) return a.det->image_id < b.det->image_id;
    return a.order < b.order;
  });

  std::map<std::string, std::vector<uint8_t>> matched;
  for (auto& [img, list] : gt_by_image) matched[img].assign(list.size(), 0);

  int tp = 0, fp = 0;
  curve.points.reserve(cands.size());
  for (const auto& cand : cands) {
    const auto it = gt_by_image.find(cand.det->image_id);
    int best_g = -1;
    double best_iou = 0.0;
    if (it != gt_by_image.end()) {
      auto& flags = matched[cand.det->image_id];
      for (size_t g = 0; g < it->second.size(); ++g) {
        if (flags[g]) continue;
        const double v = iou(cand.det->box, it->second[g]->box);
        if (v > best_iou) {
          best_iou = v;
          best_g = static_cast<int>(g);
        }
      }
    }
    if (best_g >= 0 && best_iou >= iou_min) {
      matched[cand.det->image_id][static_cast<size_t>(best_g)] = 1;
      ++tp;
    } else {
      ++fp;
    }
    PRPoint p;
    p.score = cand.det->score;
    p.precision = static_cast<double>(tp) / (tp + fp);
    p.recall = static_cast<double>(tp) / num_gt;
    curve.points.push_back(p);
  }

  // All-point interpolation: integrate max-precision-to-the-right over recall.
  std::vector<double> interp(curve.points.size());
  double running_max = 0.0;
  for (int i = static_cast<int>(curve.points.size()) - 1; i >= 0; --i) {
    running_max = std::max(running_max, curve.points[static_cast<size_t>(i)].precision);
    interp[static_cast<size_t>(i)] = running_max;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (size_t i = 0; i < curve.points.size(); ++i) {
    ap += (curve.points[i].recall - prev_recall) * interp[i];
    prev_recall = curve.points[i].recall;
  }
  curve.ap = ap;
  return curve;
}

double mean_ap(const std::vector<Detection>& dets, const std::vector<GtBox>& gts,
               const std::vector<int>& class_ids, double iou_min,
               std::map<int, PRCurve>* per_class) {
  double sum = 0.0;
  int defined = 0;
  for (int cls : class_ids) {
    PRCurve curve = average_precision(dets, gts, cls, iou_min);
    if (curve.defined) {
      sum += curve.ap;
      ++defined;
    }
    if (per_class) (*per_class)[cls] = std::move(curve);
  }
  return defined > 0 ? sum / defined : 0.0;
}

std::vector<double> precision_at_recall(const PRCurve& curve, const std::vector<double>& levels) {
  std::vector<double> out;
  out.reserve(levels.size());
  for (double r : levels) {
    double best = 0.0;
    for (const auto& p : curve.points) {
      if (p.recall >= r) best = std::max(best, p.precision);
    }
    out.push_back(best);
  }
  return out;
}

double ap_above_recall(const PRCurve& curve, double min_recall) {
  if (min_recall >= 1.0 || curve.points.empty()) return 0.0;
  std::vector<double> interp(curve.points.size());
  double running_max = 0.0;
  for (int i = static_cast<int>(curve.points.size()) - 1; i >= 0; --i) {
    running_max = std::max(running_max, curve.points[static_cast<size_t>(i)].precision);
    interp[static_cast<size_t>(i)] = running_max;
  }
  double area = 0.0;
  double prev = min_recall;
  for (size_t i = 0; i < curve.points.size(); ++i) {
    const double r = curve.points[i].recall;
    if (r <= min_recall) continue;
    area += (r - prev) * interp[i];
    prev = r;
  }
  return area / (1.0 - min_recall);
}

EvalReport evaluate(const std::vector<Detection>& dets, const std::vector<GtBox>& gts,
                    const ClassMap& classes, double iou_min) {
  EvalReport report;
  report.iou_min = iou_min;
  for (int c = 1; c <= classes.num_classes(); ++c) report.class_ids.push_back(c);
  report.map = mean_ap(dets, gts, report.class_ids, iou_min, &report.curves);
  double sum70 = 0.0;
  int defined = 0;
  for (const auto& [cls, curve] : report.curves) {
    if (!curve.defined) continue;
    sum70 += ap_above_recall(curve, 0.7);
    ++defined;
  }
  report.mean_ap_at_recall70 = defined > 0 ? sum70 / defined : 0.0;
  return report;
}

namespace {

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

}  // namespace

std::string report_text(const EvalReport& report, const ClassMap& classes) {
  std::ostringstream os;
  os << "AP per class (all-point interpolation, IoU >= " << fmt(report.iou_min, 2)
     << "; absent classes skipped)\n";
  const int per_row = 12;
  for (size_t start = 0; start < report.class_ids.size(); start += per_row) {
    const size_t end = std::min(report.class_ids.size(), start + per_row);
    std::ostringstream header, values;
    header << std::left << std::setw(10) << "class";
    values << std::left << std::setw(10) << "AP";
    for (size_t i = start; i < end; ++i) {
      const int cls = report.class_ids[i];
      const auto& curve = report.curves.at(cls);
      header << std::right << std::setw(12) << classes.name_of(cls);
      values << std::right << std::setw(12) << (curve.defined ? fmt(curve.ap) : "skip");
    }
    os << header.str() << "\n" << values.str() << "\n";
    if (end < report.class_ids.size()) os << "\n";
  }
  os << "\nmAP@" << fmt(report.iou_min, 2) << ": " << fmt(report.map) << "\n";

  os << "\nprecision at recall levels (mean over classes)\n";
  os << std::left << std::setw(10) << "recall";
  for (double r : report.recall_levels) os << std::right << std::setw(12) << fmt(r, 1);
  os << std::right << std::setw(14) << "mAP@70%";
  os << "\n" << std::left << std::setw(10) << "precision";
  std::vector<double> mean_prec(report.recall_levels.size(), 0.0);
  int defined = 0;
  for (const auto& [cls, curve] : report.curves) {
    if (!curve.defined) continue;
    const auto pr = precision_at_recall(curve, report.recall_levels);
    for (size_t i = 0; i < pr.size(); ++i) mean_prec[i] += pr[i];
    ++defined;
  }
  for (double& v : mean_prec) v = defined > 0 ? v / defined : 0.0;
  for (double v : mean_prec) os << std::right << std::setw(12) << fmt(v);
  os << std::right << std::setw(14) << fmt(report.mean_ap_at_recall70);
  os << "\n";
  return os.str();
}

std::string report_json(const EvalReport& report, const ClassMap& classes) {
  nlohmann::json j;
  j["map"] = report.map;
  j["iou_min"] = report.iou_min;
  j["interpolation"] = "all-point";
  j["map_at_recall_0.7"] = report.mean_ap_at_recall70;
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [cls, curve] : report.curves) {
    nlohmann::json c;
    c["ap"] = curve.defined ? nlohmann::json(curve.ap) : nlohmann::json();
    c["skipped"] = !curve.defined;
    c["num_gt"] = curve.num_gt;
    const auto pr = precision_at_recall(curve, report.recall_levels);
    nlohmann::json pj = nlohmann::json::object();
    for (size_t i = 0; i < report.recall_levels.size(); ++i) {
      pj[fmt(report.recall_levels[i], 1)] = pr[i];
    }
    c["precision_at_recall"] = pj;
    per_class[classes.name_of(cls)] = c;
  }
  j["classes"] = per_class;
  return j.dump(2);
}

}  // namespace cdssd
