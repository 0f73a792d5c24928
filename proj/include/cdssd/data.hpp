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

#include "cdssd/box.hpp"
#include "cdssd/targets.hpp"
#include "cdssd/tensor.hpp"

namespace cdssd {

/// Ordered class names; ids are assigned by position starting at 1, with 0
/// reserved for background.
class ClassMap {
 public:
  ClassMap() = default;
  explicit ClassMap(std::vector<std::string> names);

  static ClassMap synthetic();  // circle, square, triangle
  static ClassMap fashion24();  // the 24 fashion categories

  int id_of(const std::string& name) const;       // throws on unknown name
  const std::string& name_of(int id) const;       // throws on out-of-range id
  int num_classes() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

struct AnnotatedObject {
  std::string class_name;
  int class_id = 0;
  Box box;
};

struct Annotation {
  std::string image_path;
  std::string image_id;
  std::optional<std::string> timestamp;  // ISO-8601 date, YYYY-MM-DD
  std::vector<AnnotatedObject> objects;

  std::vector<LabeledBox> labeled_boxes() const;
};

/// Parses a JSON-Lines annotation file, validating classes against the map
/// and clipping boxes to the unit square. Malformed lines and unknown class
/// names raise errors carrying the line number / offending name.
std::vector<Annotation> load_annotations(const std::string& path, const ClassMap& classes);

void save_annotations(const std::string& path, const std::vector<Annotation>& annotations);

/// Converts Open Images box CSV rows (ImageID, LabelName, XMin/XMax/YMin/YMax
/// columns located by header) into annotations. label_map_path maps label
/// ids (e.g. "/m/01bfm9") to class names, one "id<TAB>name" per line; rows
/// whose label is absent from the map are skipped.
std::vector<Annotation> convert_open_images_csv(const std::string& csv_path,
                                                const std::string& label_map_path,
                                                const ClassMap& classes,
                                                const std::string& images_dir);

struct SynthConfig {
  int count = 100;
  int image_size = 96;
  uint64_t seed = 7;
  int min_shapes = 1, max_shapes = 4;
  double min_size = 0.1, max_size = 0.5;   // of the image side
  double max_overlap_iou = 0.3;
  int start_year = 2018, start_month = 1;  // timestamps span [start, start+months)
  int months = 12;
};

struct SynthSample {
  Tensor image;
  Annotation annotation;
};

/// Synthetic detection dataset: noise background, 1-4 filled shapes (circle,
/// square, triangle) with random colors, exact bounding-box annotations and
/// uniform timestamps. Pixel values live on the k/255 grid so file round
/// trips are exact. Bit-reproducible for a given seed; sample i does not
/// depend on count.
std::vector<SynthSample> synth_shapes(const SynthConfig& cfg);

}  // namespace cdssd
