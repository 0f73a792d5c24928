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

#include "cdssd/data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cdssd {

using nlohmann::json;

ClassMap::ClassMap(std::vector<std::string> names) : names_(std::move(names)) {
  for (size_t i = 0; i < names_.size(); ++i) {
    for (size_t j = i + 1; j < names_.size(); ++j) {
      if (names_[i] == names_[j]) {
        throw std::invalid_argument("ClassMap: duplicate class name '" + names_[i] + "'");
      }
    }
  }
}

ClassMap ClassMap::synthetic() { return ClassMap({"circle", "square", "triangle"}); }

ClassMap ClassMap::fashion24() {
  return ClassMap({"sandal",     "high-heels", "boot",    "jeans",   "shorts",  "swimwear",
                   "brasseire",  "shirt",      "coat",    "suit",    "miniskirt", "jacket",
                   "dress",      "sun-hat",    "cowboy-hat", "umbrella", "glasses", "belt",
                   "earrings",   "handbag",    "watch",   "backpack", "suitcase", "briefcase"});
}

int ClassMap::id_of(const std::string& name) const {
  for (size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i) + 1;
  }
  throw std::invalid_argument("unknown class name '" + name + "'");
}

const std::string& ClassMap::name_of(int id) const {
  if (id < 1 || id > num_classes()) {
    throw std::invalid_argument("class id " + std::to_string(id) + " out of range");
  }
  return names_[static_cast<size_t>(id) - 1];
}

std::vector<LabeledBox> Annotation::labeled_boxes() const {
  std::vector<LabeledBox> out;
  out.reserve(objects.size());
  for (const auto& obj : objects) out.push_back({obj.box, obj.class_id});
  return out;
}

namespace {

Box validated_box(double cx, double cy, double w, double h, const std::string& where) {
  if (!(w > 0.0) || !(h > 0.0)) {
    throw std::runtime_error(where + ": box has non-positive size");
  }
  Box b = clip_box(Box{cx, cy, w, h});
  if (b.w <= 0.0 || b.h <= 0.0) {
    throw std::runtime_error(where + ": box lies outside the image");
  }
  return b;
}

}  // namespace

std::vector<Annotation> load_annotations(const std::string& path, const ClassMap& classes) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open annotation file " + path);
  std::vector<Annotation> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(where + ": malformed JSON (" + e.what() + ")");
    }
    Annotation ann;
    try {
      ann.image_path = j.at("image_path").get<std::string>();
      ann.image_id = j.at("image_id").get<std::string>();
      if (j.contains("timestamp") && !j["timestamp"].is_null()) {
        ann.timestamp = j["timestamp"].get<std::string>();
      }
      for (const auto& obj : j.at("objects")) {
        AnnotatedObject o;
        o.class_name = obj.at("class").get<std::string>();
        o.class_id = classes.id_of(o.class_name);
        o.box = validated_box(obj.at("cx").get<double>(), obj.at("cy").get<double>(),
                              obj.at("w").get<double>(), obj.at("h").get<double>(), where);
        ann.objects.push_back(std::move(o));
      }
    } catch (const json::exception& e) {
      throw std::runtime_error(where + ": bad annotation record (" + e.what() + ")");
    }
    out.push_back(std::move(ann));
  }
  return out;
}

void save_annotations(const std::string& path, const std::vector<Annotation>& annotations) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& ann : annotations) {
    json j;
    j["image_path"] = ann.image_path;
    j["image_id"] = ann.image_id;
    if (ann.timestamp) j["timestamp"] = *ann.timestamp;
    json objs = json::array();
    for (const auto& o : ann.objects) {
      objs.push_back({{"class", o.class_name},
                      {"cx", o.box.cx},
                      {"cy", o.box.cy},
                      {"w", o.box.w},
                      {"h", o.box.h}});
    }
    j["objects"] = std::move(objs);
    os << j.dump() << "\n";
  }
  if (!os) throw std::runtime_error("write failed for " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::vector<Annotation> convert_open_images_csv(const std::string& csv_path,
                                                const std::string& label_map_path,
                                                const ClassMap& classes,
                                                const std::string& images_dir) {
  std::ifstream labels(label_map_path);
  if (!labels) throw std::runtime_error("cannot open label map " + label_map_path);
  std::map<std::string, std::string> label_to_name;
  std::string line;
  while (std::getline(labels, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    label_to_name[line.substr(0, tab)] = line.substr(tab + 1);
  }

  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open CSV " + csv_path);
  if (!std::getline(csv, line)) throw std::runtime_error(csv_path + ": empty CSV");
  const auto header = split_csv_line(line);
  auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error(csv_path + ": missing column " + name);
    return static_cast<size_t>(it - header.begin());
  };
  const size_t c_img = col("ImageID"), c_label = col("LabelName");
  const size_t c_x0 = col("XMin"), c_x1 = col("XMax"), c_y0 = col("YMin"), c_y1 = col("YMax");

  // Rows arrive grouped arbitrarily; collect boxes per image in file order.
  std::vector<Annotation> out;
  std::map<std::string, size_t> index;
  int line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const size_t need = std::max({c_img, c_label, c_x0, c_x1, c_y0, c_y1});
    if (f.size() <= need) {
      throw std::runtime_error(csv_path + ":" + std::to_string(line_no) + ": short row");
    }
    const auto name_it = label_to_name.find(f[c_label]);
    if (name_it == label_to_name.end()) continue;

    const std::string& image_id = f[c_img];
    auto idx_it = index.find(image_id);
    if (idx_it == index.end()) {
      Annotation ann;
      ann.image_id = image_id;
      ann.image_path = images_dir.empty() ? image_id + ".jpg" : images_dir + "/" + image_id + ".jpg";
      idx_it = index.emplace(image_id, out.size()).first;
      out.push_back(std::move(ann));
    }
    AnnotatedObject o;
    o.class_name = name_it->second;
    o.class_id = classes.id_of(o.class_name);
    const double x0 = std::stod(f[c_x0]), x1 = std::stod(f[c_x1]);
    const double y0 = std::stod(f[c_y0]), y1 = std::stod(f[c_y1]);
    o.box = validated_box((x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0,
                          csv_path + ":" + std::to_string(line_no));
    out[idx_it->second].objects.push_back(std::move(o));
  }
  return out;
}

}  // namespace cdssd
