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
#include <utility>
#include <vector>

#include "cdssd/augment.hpp"
#include "cdssd/data.hpp"
#include "cdssd/net.hpp"

namespace cdssd {

struct TrainConfig {
  int batch_size = 8;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::vector<std::pair<double, int>> schedule;  // (learning rate, steps)
  uint64_t seed = 1;
  NetMode mode = NetMode::kPretrain;
  double neg_ratio = 2.0;
  double match_threshold = 0.5;
  AugmentConfig augment;

  void validate() const;
  int total_steps() const;
  double lr_at(int step) const;  // 0-based step index
};

struct StepLog {
  int step = 0;
  std::string phase;  // "pretrain" or "detect"
  double lr = 0.0;
  double loc_loss = 0.0, conf_loss = 0.0, total = 0.0;
  long num_pos = 0, num_mined = 0, num_neg_avail = 0, num_zero_pos_images = 0;
};

using LossLog = std::vector<StepLog>;

/// CSV columns: step,phase,lr,loc_loss,conf_loss,total,num_pos,num_mined,
/// num_neg_avail,num_zero_pos_images.
void write_loss_log_csv(const std::string& path, const LossLog& log);
LossLog read_loss_log_csv(const std::string& path);

struct SgdState {
  GradMap velocity;
};

/// SGD with momentum and decoupled-from-nothing classic weight decay:
/// v <- momentum*v + grad + weight_decay*param; param <- param - lr*v.
/// Only parameters present in `grads` are updated. Non-finite gradients abort
/// with the tensor name in the diagnostic.
void sgd_step(std::map<std::string, Tensor>& params, const GradMap& grads, SgdState& state,
              double lr, double momentum, double weight_decay);

struct DetectionDataset {
  std::vector<Tensor> images;
  std::vector<Annotation> annotations;  // parallel to images

  size_t size() const { return images.size(); }
};

/// Loads every image referenced by an annotation file; relative image paths
/// resolve against the annotation file's directory. Images are nearest-
/// resized to `image_size` when they do not match.
DetectionDataset load_detection_dataset(const std::string& annotations_path,
                                        const ClassMap& classes, int image_size);

/// Unsupervised reconstruction training. The network must be in pretrain
/// mode. Batches are drawn epoch-wise from a seed-shuffled order, dropping
/// the last partial batch. Returns the per-step loss log.
LossLog pretrain(Network& net, const std::vector<Tensor>& images, const TrainConfig& cfg);

/// Detection fine-tuning: per image augment -> match -> forward -> loss ->
/// backward; per-image gradients are reduced in batch order, so runs are
/// bit-reproducible for a (seed, config, dataset order) triple. The anchor
/// set must match the network layout.
LossLog finetune(Network& net, const DetectionDataset& data, const AnchorSet& anchors,
                 const TrainConfig& cfg);

struct FinetuneProbe {
  double target_map = 0.7;
  int eval_every = 100;
  double iou_min = 0.5;
};

struct FinetuneUntilResult {
  int steps_to_target = -1;  // first step count where val mAP >= target; -1 if never
  double final_map = 0.0;
  LossLog log;
};

/// finetune() with periodic validation; stops at the first evaluation whose
/// mAP reaches the target. Used by the pretraining-benefit experiment.
FinetuneUntilResult finetune_until_map(Network& net, const DetectionDataset& train,
                                       const AnchorSet& anchors, const TrainConfig& cfg,
                                       const DetectionDataset& val, const ClassMap& classes,
                                       const FinetuneProbe& probe);

/// mAP of the network on a dataset (detect + evaluate in one call).
double dataset_map(const Network& net, const AnchorSet& anchors, const DetectionDataset& data,
                   const ClassMap& classes, double iou_min = 0.5);

}  // namespace cdssd
