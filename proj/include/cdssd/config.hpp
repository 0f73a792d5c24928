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

#include <string>

#include "cdssd/inference.hpp"
#include "cdssd/trainer.hpp"

namespace cdssd {

/// Everything one experiment needs, serializable as a single JSON document
/// with sections "net", "pretrain", "train" (including "augment") and
/// "detect". Missing fields keep their defaults.
struct RunConfig {
  NetworkConfig net;
  TrainConfig pretrain_cfg;  // mode forced to pretrain
  TrainConfig train_cfg;     // mode forced to detect
  DetectParams detect_params;

  RunConfig();  // desk-profile defaults
};

/// The paper-scale profile: 300x300 input, 7+7 meta-layers, full schedules.
/// Expressible in the same config format; not runnable at desk scale.
RunConfig paper_profile();

RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& config);
std::string run_config_json(const RunConfig& config);
RunConfig parse_run_config(const std::string& json_text);

}  // namespace cdssd
