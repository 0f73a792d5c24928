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

#include "cdssd/inference.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "cdssd/targets.hpp"

namespace cdssd {

using nlohmann::json;

std::vector<int> nms(const std::vector<Box>& boxes, const std::vector<double>& scores,
                     double iou_threshold) {
  if (boxes.size() != scores.size()) throw std::invalid_argument("nms: boxes/scores size mismatch");
  if (iou_threshold <= 0.0 || iou_threshold >= 1.0) {
    throw std::invalid_argument("nms: threshold must be in (0,1)");
  }
  std::vector<int> order(boxes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  std::vector<int> kept;
  std::vector<uint8_t> dead(boxes.size(), 0);
  for (int i : order) {
    if (dead[i]) continue;
    kept.push_back(i);
    for (int j : order) {
      if (j == i || dead[j]) continue;
      if (iou(boxes[i], boxes[j]) > iou_threshold) dead[j] = 1;
    }
  }
  return kept;
}

std::vector<Detection> detect(const Network& net, const AnchorSet& anchors, const Tensor& image,
                              const DetectParams& params, const std::string& image_id,
                              const std::optional<std::string>& timestamp) {
  const HeadOutput head = forward_detect(net, image);
  const int a_count = static_cast<int>(anchors.boxes.size());
  if (head.logits.dim(0) != a_count) {
    throw std::runtime_error("detect: anchor set does not match network layout");
  }
  const Tensor probs = kernels::softmax_rows(head.logits);
  const int nc1 = probs.dim(1);

  std::vector<Detection> all;
  for (int cls = 1; cls < nc1; ++cls) {
    std::vector<Box> boxes;
    std::vector<double> scores;
    for (int a = 0; a < a_count; ++a) {
      const double p = probs.at(a, cls);
      if (p < params.conf_threshold) continue;
      boxes.push_back(decode_offsets(
          {head.offsets.at(a, 0), head.offsets.at(a, 1), head.offsets.at(a, 2), head.offsets.at(a, 3)},
          anchors.boxes[a]));
      scores.push_back(p);
    }
    for (int idx : nms(boxes, scores, params.nms_iou)) {
      Detection d;
      d.box = boxes[idx];
      d.class_id = cls;
      d.score = scores[idx];
      d.image_id = image_id;
      d.timestamp = timestamp;
      all.push_back(std::move(d));
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.class_id < b.class_id;
  });
  if (static_cast<int>(all.size()) > params.max_dets) all.resize(params.max_dets);
  return all;
}

std::vector<Detection> detect_dataset(const Network& net, const AnchorSet& anchors,
                                      const std::vector<Tensor>& images,
                                      const std::vector<Annotation>& annotations,
                                      const DetectParams& params) {
  if (images.size() != annotations.size()) {
    throw std::invalid_argument("detect_dataset: images/annotations size mismatch");
  }
  std::vector<std::vector<Detection>> per_image(images.size());
  std::vector<std::exception_ptr> errors(images.size());
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < static_cast<int64_t>(images.size()); ++i) {
    try {
      per_image[i] = detect(net, anchors, images[i], params, annotations[i].image_id,
                            annotations[i].timestamp);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  std::vector<Detection> out;
  for (auto& dets : per_image) {
    for (auto& d : dets) out.push_back(std::move(d));
  }
  return out;
}

void save_detections(const std::string& path, const std::vector<Detection>& dets,
                     const ClassMap& classes) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& d : dets) {
    json j;
    j["image_id"] = d.image_id;
    j["class_id"] = d.class_id;
    j["class_name"] = classes.name_of(d.class_id);
    j["cx"] = d.box.cx;
    j["cy"] = d.box.cy;
    j["w"] = d.box.w;
    j["h"] = d.box.h;
    j["score"] = d.score;
    if (d.timestamp) j["timestamp"] = *d.timestamp;
    os << j.dump() << "\n";
  }
  if (!os) throw std::runtime_error("write failed for " + path);
}

std::vector<Detection> load_detections(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open detections file " + path);
  std::vector<Detection> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      Detection d;
      d.image_id = j.at("image_id").get<std::string>();
      d.class_id = j.at("class_id").get<int>();
      d.box = Box{j.at("cx").get<double>(), j.at("cy").get<double>(), j.at("w").get<double>(),
                  j.at("h").get<double>()};
      d.score = j.at("score").get<double>();
      if (j.contains("timestamp") && !j["timestamp"].is_null()) {
        d.timestamp = j["timestamp"].get<std::string>();
      }
      out.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad detection record (" +
                               e.what() + ")");
    }
  }
  return out;
}

}  // namespace cdssd
