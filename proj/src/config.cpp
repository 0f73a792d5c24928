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

#include "cdssd/config.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace cdssd {

using nlohmann::json;

RunConfig::RunConfig() {
  pretrain_cfg.mode = NetMode::kPretrain;
  pretrain_cfg.schedule = {{1e-3, 600}, {1e-4, 600}};
  train_cfg.mode = NetMode::kDetect;
  train_cfg.schedule = {{2e-3, 900}, {1e-4, 1100}};
}

RunConfig paper_profile() {
  RunConfig cfg;
  cfg.net.input_size = 300;
  cfg.net.meta_layers = 7;
  cfg.net.channels = {16, 32, 64, 128, 256, 256, 256};
  cfg.net.num_classes = 24;
  cfg.net.heads_on_layers = {3, 4, 5, 6, 7};
  cfg.net.box_pool_per_layer = {3, 3, 2, 1, 1};
  cfg.net.layer_scales = {0.10, 0.22, 0.38, 0.55, 0.75};
  cfg.net.fused_channels = 64;
  cfg.pretrain_cfg.batch_size = 16;
  cfg.pretrain_cfg.schedule = {{1e-3, 25000}, {1e-4, 60000}};
  cfg.train_cfg.batch_size = 16;
  cfg.train_cfg.schedule = {{2e-3, 30000}, {1e-4, 60000}};
  return cfg;
}

namespace {

void net_from_json(const json& j, NetworkConfig& c) {
  c.input_size = j.value("input_size", c.input_size);
  c.meta_layers = j.value("meta_layers", c.meta_layers);
  c.channels = j.value("channels", c.channels);
  c.num_classes = j.value("num_classes", c.num_classes);
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  c.heads_on_layers = j.value("heads_on_layers", c.heads_on_layers);
  c.box_pool_per_layer = j.value("box_pool_per_layer", c.box_pool_per_layer);
  c.layer_scales = j.value("layer_scales", c.layer_scales);
  c.fused_channels = j.value("fused_channels", c.fused_channels);
  c.anchors_per_cell = j.value("anchors_per_cell", c.anchors_per_cell);
}

json net_to_json(const NetworkConfig& c) {
  return json{{"input_size", c.input_size},
              {"meta_layers", c.meta_layers},
              {"channels", c.channels},
              {"num_classes", c.num_classes},
              {"dropout_rate", c.dropout_rate},
              {"heads_on_layers", c.heads_on_layers},
              {"box_pool_per_layer", c.box_pool_per_layer},
              {"layer_scales", c.layer_scales},
              {"fused_channels", c.fused_channels},
              {"anchors_per_cell", c.anchors_per_cell}};
}

void augment_from_json(const json& j, AugmentConfig& a) {
  a.crop = j.value("crop", a.crop);
  a.min_ious = j.value("min_ious", a.min_ious);
  a.patch_scale_min = j.value("patch_scale_min", a.patch_scale_min);
  a.patch_scale_max = j.value("patch_scale_max", a.patch_scale_max);
  a.patch_aspect_min = j.value("patch_aspect_min", a.patch_aspect_min);
  a.patch_aspect_max = j.value("patch_aspect_max", a.patch_aspect_max);
  a.patch_attempts = j.value("patch_attempts", a.patch_attempts);
  a.flip_prob = j.value("flip_prob", a.flip_prob);
  a.blackout_frac = j.value("blackout_frac", a.blackout_frac);
  a.blackout_prob = j.value("blackout_prob", a.blackout_prob);
  a.blur = j.value("blur", a.blur);
  a.emboss = j.value("emboss", a.emboss);
  a.edge = j.value("edge", a.edge);
  a.color_jitter = j.value("color_jitter", a.color_jitter);
  a.photometric_prob = j.value("photometric_prob", a.photometric_prob);
  a.color_jitter_strength = j.value("color_jitter_strength", a.color_jitter_strength);
}

json augment_to_json(const AugmentConfig& a) {
  return json{{"crop", a.crop},
              {"min_ious", a.min_ious},
              {"patch_scale_min", a.patch_scale_min},
              {"patch_scale_max", a.patch_scale_max},
              {"patch_aspect_min", a.patch_aspect_min},
              {"patch_aspect_max", a.patch_aspect_max},
              {"patch_attempts", a.patch_attempts},
              {"flip_prob", a.flip_prob},
              {"blackout_frac", a.blackout_frac},
              {"blackout_prob", a.blackout_prob},
              {"blur", a.blur},
              {"emboss", a.emboss},
              {"edge", a.edge},
              {"color_jitter", a.color_jitter},
              {"photometric_prob", a.photometric_prob},
              {"color_jitter_strength", a.color_jitter_strength}};
}

void train_from_json(const json& j, TrainConfig& t) {
  t.batch_size = j.value("batch_size", t.batch_size);
  t.momentum = j.value("momentum", t.momentum);
  t.weight_decay = j.value("weight_decay", t.weight_decay);
  if (j.contains("schedule")) {
    t.schedule.clear();
    for (const auto& pair : j.at("schedule")) {
      t.schedule.emplace_back(pair.at(0).get<double>(), pair.at(1).get<int>());
    }
  }
  t.seed = j.value("seed", t.seed);
  t.neg_ratio = j.value("neg_ratio", t.neg_ratio);
  t.match_threshold = j.value("match_threshold", t.match_threshold);
  if (j.contains("augment")) augment_from_json(j.at("augment"), t.augment);
}

json train_to_json(const TrainConfig& t) {
  json schedule = json::array();
  for (const auto& [lr, steps] : t.schedule) schedule.push_back(json::array({lr, steps}));
  return json{{"batch_size", t.batch_size}, {"momentum", t.momentum},
              {"weight_decay", t.weight_decay}, {"schedule", schedule},
              {"seed", t.seed},               {"neg_ratio", t.neg_ratio},
              {"match_threshold", t.match_threshold}, {"augment", augment_to_json(t.augment)}};
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config: malformed JSON (") + e.what() + ")");
  }
  RunConfig cfg;
  if (j.contains("net")) net_from_json(j.at("net"), cfg.net);
  if (j.contains("pretrain")) train_from_json(j.at("pretrain"), cfg.pretrain_cfg);
  if (j.contains("train")) train_from_json(j.at("train"), cfg.train_cfg);
  cfg.pretrain_cfg.mode = NetMode::kPretrain;
  cfg.train_cfg.mode = NetMode::kDetect;
  if (j.contains("detect")) {
    const auto& d = j.at("detect");
    cfg.detect_params.conf_threshold = d.value("conf_threshold", cfg.detect_params.conf_threshold);
    cfg.detect_params.nms_iou = d.value("nms_iou", cfg.detect_params.nms_iou);
    cfg.detect_params.max_dets = d.value("max_dets", cfg.detect_params.max_dets);
  }
  return cfg;
}

std::string run_config_json(const RunConfig& config) {
  json j;
  j["net"] = net_to_json(config.net);
  j["pretrain"] = train_to_json(config.pretrain_cfg);
  j["train"] = train_to_json(config.train_cfg);
  j["detect"] = json{{"conf_threshold", config.detect_params.conf_threshold},
                     {"nms_iou", config.detect_params.nms_iou},
                     {"max_dets", config.detect_params.max_dets}};
  return j.dump(2);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

void save_run_config(const std::string& path, const RunConfig& config) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << run_config_json(config) << "\n";
}

}  // namespace cdssd
