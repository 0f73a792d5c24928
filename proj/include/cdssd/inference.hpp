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

#include <optional>
#include <string>
#include <vector>

#include "cdssd/data.hpp"
#include "cdssd/net.hpp"

namespace cdssd {

struct Detection {
  Box box;
  int class_id = 0;  // 1..C
  double score = 0.0;
  std::string image_id;
  std::optional<std::string> timestamp;
};

/// Greedy non-maximum suppression: repeatedly keeps the highest-score box
/// (ties by lower index) and drops boxes overlapping it with IoU above the
/// threshold. Returns kept indices in descending score order.
std::vector<int> nms(const std::vector<Box>& boxes, const std::vector<double>& scores,
                     double iou_threshold);

struct DetectParams {
  double conf_threshold = 0.01;  // evaluation default; the CLI uses 0.5 for annotation output
  double nms_iou = 0.45;
  int max_dets = 200;
};

/// Full post-processing for one image: softmax scores, per-class confidence
/// filter, offset decode against the anchors, per-class NMS, global top-k.
/// Pure in (net parameters, image, params).
std::vector<Detection> detect(const Network& net, const AnchorSet& anchors, const Tensor& image,
                              const DetectParams& params = {}, const std::string& image_id = "",
                              const std::optional<std::string>& timestamp = std::nullopt);

/// detect() over a dataset, parallel across images, output in dataset order.
std::vector<Detection> detect_dataset(const Network& net, const AnchorSet& anchors,
                                      const std::vector<Tensor>& images,
                                      const std::vector<Annotation>& annotations,
                                      const DetectParams& params = {});

/// JSON-Lines serialization:
/// {"image_id","class_id","class_name","cx","cy","w","h","score","timestamp"?}
void save_detections(const std::string& path, const std::vector<Detection>& dets,
                     const ClassMap& classes);
std::vector<Detection> load_detections(const std::string& path);

}  // namespace cdssd
