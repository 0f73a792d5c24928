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

#include "cdssd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "cdssd/eval.hpp"
#include "cdssd/image_io.hpp"
#include "cdssd/inference.hpp"
#include "cdssd/rng.hpp"

namespace cdssd {

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
  if (momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("train config: momentum must be in [0,1)");
  }
  if (weight_decay < 0.0) throw std::invalid_argument("train config: weight_decay must be >= 0");
  if (schedule.empty()) throw std::invalid_argument("train config: empty schedule");
  for (const auto& [lr, steps] : schedule) {
    if (lr <= 0.0) throw std::invalid_argument("train config: learning rates must be > 0");
    if (steps < 0) throw std::invalid_argument("train config: negative step count");
  }
  if (neg_ratio <= 0.0) throw std::invalid_argument("train config: neg_ratio must be > 0");
  if (match_threshold <= 0.0 || match_threshold >= 1.0) {
    throw std::invalid_argument("train config: match_threshold must be in (0,1)");
  }
  augment.validate();
}

int TrainConfig::total_steps() const {
  int total = 0;
  for (const auto& [lr, steps] : schedule) total += steps;
  return total;
}

double TrainConfig::lr_at(int step) const {
  int acc = 0;
  for (const auto& [lr, steps] : schedule) {
    acc += steps;
    if (step < acc) return lr;
  }
  return schedule.back().first;
}

void write_loss_log_csv(const std::string& path, const LossLog& log) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "step,phase,lr,loc_loss,conf_loss,total,num_pos,num_mined,num_neg_avail,"
        "num_zero_pos_images\n";
  char buf[256];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.10g,%.10g,%.10g,%.10g,%ld,%ld,%ld,%ld\n", row.step,
                  row.phase.c_str(), row.lr, row.loc_loss, row.conf_loss, row.total, row.num_pos,
                  row.num_mined, row.num_neg_avail, row.num_zero_pos_images);
    os << buf;
  }
  if (!os) throw std::runtime_error("write failed for " + path);
}

LossLog read_loss_log_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open loss log " + path);
  LossLog log;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    StepLog row;
    std::getline(ss, field, ',');
    row.step = std::stoi(field);
    std::getline(ss, row.phase, ',');
    std::getline(ss, field, ',');
    row.lr = std::stod(field);
    std::getline(ss, field, ',');
    row.loc_loss = std::stod(field);
    std::getline(ss, field, ',');
    row.conf_loss = std::stod(field);
    std::getline(ss, field, ',');
    row.total = std::stod(field);
    std::getline(ss, field, ',');
    row.num_pos = std::stol(field);
    std::getline(ss, field, ',');
    row.num_mined = std::stol(field);
    std::getline(ss, field, ',');
    row.num_neg_avail = std::stol(field);
    std::getline(ss, field, ',');
    row.num_zero_pos_images = std::stol(field);
    log.push_back(std::move(row));
  }
  return log;
}

void sgd_step(std::map<std::string, Tensor>& params, const GradMap& grads, SgdState& state,
              double lr, double momentum, double weight_decay) {
  for (const auto& [name, grad] : grads) {
    auto pit = params.find(name);
    if (pit == params.end()) throw std::runtime_error("sgd_step: gradient for unknown parameter " + name);
    Tensor& p = pit->second;
    if (p.shape != grad.shape) throw std::runtime_error("sgd_step: gradient shape mismatch for " + name);
    if (!all_finite(grad)) throw std::runtime_error("sgd_step: non-finite gradient in " + name);
    auto vit = state.velocity.find(name);
    if (vit == state.velocity.end()) vit = state.velocity.emplace(name, Tensor(p.shape)).first;
    Tensor& v = vit->second;
    for (size_t i = 0; i < p.data.size(); ++i) {
      v.data[i] = momentum * v.data[i] + grad.data[i] + weight_decay * p.data[i];
      p.data[i] -= lr * v.data[i];
    }
  }
}

namespace {

std::vector<int> shuffled_order(int n, Rng& rng) {
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  for (int i = n - 1; i >= 1; --i) {
    const int j = rng.uniform_int(i + 1);
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
  }
  return order;
}

void reduce_grads(GradMap& total, const std::vector<GradMap>& parts, double scale) {
  for (const auto& part : parts) {
    for (const auto& [name, g] : part) {
      auto it = total.find(name);
      if (it == total.end()) it = total.emplace(name, Tensor(g.shape)).first;
      for (size_t i = 0; i < g.data.size(); ++i) it->second.data[i] += g.data[i] * scale;
    }
  }
}

constexpr uint64_t kEpochStream = 0x45504f43ull;    // batch order
constexpr uint64_t kDropoutStream = 0x44524f50ull;  // per-step dropout masks
constexpr uint64_t kAugmentStream = 0x41554d47ull;  // per-image augmentation

}  // namespace

LossLog pretrain(Network& net, const std::vector<Tensor>& images, const TrainConfig& cfg) {
  cfg.validate();
  if (net.mode != NetMode::kPretrain) throw std::runtime_error("pretrain: network not in pretrain mode");
  if (images.empty()) throw std::invalid_argument("pretrain: dataset is empty");
  const int n = static_cast<int>(images.size());
  if (n < cfg.batch_size) {
    throw std::invalid_argument("pretrain: dataset smaller than one batch");
  }

  const int total_steps = cfg.total_steps();
  LossLog log;
  log.reserve(static_cast<size_t>(total_steps));
  SgdState state;
  int step = 0;
  for (int epoch = 0; step < total_steps; ++epoch) {
    Rng erng(mix64(cfg.seed, kEpochStream, static_cast<uint64_t>(epoch)));
    const std::vector<int> order = shuffled_order(n, erng);
    for (int b = 0; b + cfg.batch_size <= n && step < total_steps; b += cfg.batch_size) {
      const double lr = cfg.lr_at(step);
      std::vector<GradMap> grads_parts(static_cast<size_t>(cfg.batch_size));
      std::vector<double> losses(static_cast<size_t>(cfg.batch_size));
      std::vector<std::exception_ptr> errors(static_cast<size_t>(cfg.batch_size));
      const uint64_t dropout_key = mix64(cfg.seed, kDropoutStream, static_cast<uint64_t>(step));
#pragma omp parallel for schedule(static)
      for (int s = 0; s < cfg.batch_size; ++s) {
        try {
          ForwardTrace trace;
          forward_autoencoder(net, images[static_cast<size_t>(order[static_cast<size_t>(b + s)])],
                              dropout_key, &trace);
          losses[static_cast<size_t>(s)] = autoencoder_backward(net, trace, grads_parts[static_cast<size_t>(s)]);
        } catch (...) {
          errors[static_cast<size_t>(s)] = std::current_exception();
        }
      }
      for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
      }
      GradMap grads;
      reduce_grads(grads, grads_parts, 1.0 / cfg.batch_size);
      double loss = 0.0;
      for (double l : losses) loss += l;
      loss /= cfg.batch_size;
      if (!std::isfinite(loss)) {
        throw std::runtime_error("pretrain: non-finite loss at step " + std::to_string(step));
      }
      try {
        sgd_step(net.params, grads, state, lr, cfg.momentum, cfg.weight_decay);
      } catch (const std::exception& e) {
        throw std::runtime_error(std::string(e.what()) + " (pretrain step " + std::to_string(step) + ")");
      }
      StepLog row;
      row.step = step;
      row.phase = "pretrain";
      row.lr = lr;
      row.total = loss;
      log.push_back(std::move(row));
      ++step;
    }
  }
  return log;
}

namespace {

void check_anchor_layout(const Network& net, const AnchorSet& anchors) {
  const auto expect = head_layout(net.config);
  if (anchors.layout.size() != expect.size()) {
    throw std::runtime_error("anchor set layout does not match network heads");
  }
  for (size_t i = 0; i < expect.size(); ++i) {
    const auto& a = anchors.layout[i];
    const auto& e = expect[i];
    if (a.layer_index != e.layer_index || a.m != e.m || a.n != e.n || a.K != e.K ||
        a.box_pool_k != e.box_pool_k) {
      throw std::runtime_error("anchor set layout does not match network heads at layer " +
                               std::to_string(e.layer_index));
    }
  }
  if (static_cast<int>(anchors.boxes.size()) != total_anchor_rows(net.config)) {
    throw std::runtime_error("anchor count does not match network head rows");
  }
}

LossLog finetune_impl(Network& net, const DetectionDataset& data, const AnchorSet& anchors,
                      const TrainConfig& cfg, const std::function<bool(int)>& stop_probe,
                      int probe_every) {
  cfg.validate();
  if (net.mode != NetMode::kDetect) throw std::runtime_error("finetune: network not in detect mode");
  if (data.size() == 0) throw std::invalid_argument("finetune: dataset is empty");
  check_anchor_layout(net, anchors);
  const int n = static_cast<int>(data.size());
  if (n < cfg.batch_size) throw std::invalid_argument("finetune: dataset smaller than one batch");
  const long a_total = static_cast<long>(anchors.boxes.size());

  const int total_steps = cfg.total_steps();
  LossLog log;
  log.reserve(static_cast<size_t>(total_steps));
  SgdState state;
  int step = 0;
  for (int epoch = 0; step < total_steps; ++epoch) {
    Rng erng(mix64(cfg.seed, kEpochStream, static_cast<uint64_t>(epoch)));
    const std::vector<int> order = shuffled_order(n, erng);
    for (int b = 0; b + cfg.batch_size <= n && step < total_steps; b += cfg.batch_size) {
      const double lr = cfg.lr_at(step);
      std::vector<GradMap> grads_parts(static_cast<size_t>(cfg.batch_size));
      std::vector<LossReport> reports(static_cast<size_t>(cfg.batch_size));
      std::vector<std::exception_ptr> errors(static_cast<size_t>(cfg.batch_size));
#pragma omp parallel for schedule(static)
      for (int s = 0; s < cfg.batch_size; ++s) {
        try {
          const int idx = order[static_cast<size_t>(b + s)];
          Sample sample{data.images[static_cast<size_t>(idx)],
                        data.annotations[static_cast<size_t>(idx)].labeled_boxes()};
          Rng arng(mix64(cfg.seed, kAugmentStream,
                         static_cast<uint64_t>(step) * 1000003ull + static_cast<uint64_t>(s)));
          const Sample aug = augment_sample(sample, cfg.augment, arng);
          const MatchResult match = match_anchors(anchors, aug.gts, cfg.match_threshold);
          ForwardTrace trace;
          const HeadOutput head = forward_detect(net, aug.image, &trace);
          Tensor dlogits, doffsets;
          reports[static_cast<size_t>(s)] =
              detection_loss(head.logits, head.offsets, match, cfg.neg_ratio, &dlogits, &doffsets);
          detect_backward(net, trace, dlogits, doffsets, grads_parts[static_cast<size_t>(s)]);
        } catch (...) {
          errors[static_cast<size_t>(s)] = std::current_exception();
        }
      }
      for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
      }

      GradMap grads;
      reduce_grads(grads, grads_parts, 1.0 / cfg.batch_size);
      StepLog row;
      row.step = step;
      row.phase = "detect";
      row.lr = lr;
      for (const auto& rep : reports) {
        row.loc_loss += rep.localization / cfg.batch_size;
        row.conf_loss += rep.confidence / cfg.batch_size;
        row.total += rep.total / cfg.batch_size;
        row.num_pos += rep.num_positives;
        row.num_mined += rep.num_mined_negatives;
        const long avail = a_total - rep.num_positives;
        row.num_neg_avail += avail;
        if (rep.num_positives == 0) ++row.num_zero_pos_images;
        // Mining contract, per image: 2:1 capped by availability.
        const long expected = rep.num_positives > 0
                                  ? std::min(static_cast<long>(cfg.neg_ratio * rep.num_positives), avail)
                                  : std::min(1L, avail);
        if (rep.num_mined_negatives != expected) {
          throw std::logic_error("finetune: mined negative count " +
                                 std::to_string(rep.num_mined_negatives) + " != expected " +
                                 std::to_string(expected) + " at step " + std::to_string(step));
        }
      }
      if (!std::isfinite(row.total)) {
        throw std::runtime_error("finetune: non-finite loss at step " + std::to_string(step));
      }
      try {
        sgd_step(net.params, grads, state, lr, cfg.momentum, cfg.weight_decay);
      } catch (const std::exception& e) {
        throw std::runtime_error(std::string(e.what()) + " (finetune step " + std::to_string(step) + ")");
      }
      log.push_back(std::move(row));
      ++step;
      if (stop_probe && probe_every > 0 && step % probe_every == 0 && stop_probe(step)) {
        return log;
      }
    }
  }
  return log;
}

}  // namespace

LossLog finetune(Network& net, const DetectionDataset& data, const AnchorSet& anchors,
                 const TrainConfig& cfg) {
  return finetune_impl(net, data, anchors, cfg, nullptr, 0);
}

FinetuneUntilResult finetune_until_map(Network& net, const DetectionDataset& train,
                                       const AnchorSet& anchors, const TrainConfig& cfg,
                                       const DetectionDataset& val, const ClassMap& classes,
                                       const FinetuneProbe& probe) {
  FinetuneUntilResult result;
  auto stop = [&](int step) {
    const double map = dataset_map(net, anchors, val, classes, probe.iou_min);
    result.final_map = map;
    if (map >= probe.target_map && result.steps_to_target < 0) {
      result.steps_to_target = step;
      return true;
    }
    return false;
  };
  result.log = finetune_impl(net, train, anchors, cfg, stop, probe.eval_every);
  if (result.steps_to_target < 0) {
    result.final_map = dataset_map(net, anchors, val, classes, probe.iou_min);
    if (result.final_map >= probe.target_map) result.steps_to_target = cfg.total_steps();
  }
  return result;
}

double dataset_map(const Network& net, const AnchorSet& anchors, const DetectionDataset& data,
                   const ClassMap& classes, double iou_min) {
  const std::vector<Detection> dets = detect_dataset(net, anchors, data.images, data.annotations);
  const std::vector<GtBox> gts = flatten_ground_truth(data.annotations);
  std::vector<int> class_ids;
  for (int c = 1; c <= classes.num_classes(); ++c) class_ids.push_back(c);
  return mean_ap(dets, gts, class_ids, iou_min);
}

DetectionDataset load_detection_dataset(const std::string& annotations_path,
                                        const ClassMap& classes, int image_size) {
  DetectionDataset data;
  data.annotations = load_annotations(annotations_path, classes);
  const std::filesystem::path base = std::filesystem::path(annotations_path).parent_path();
  data.images.resize(data.annotations.size());
  std::vector<std::exception_ptr> errors(data.annotations.size());
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < static_cast<int64_t>(data.annotations.size()); ++i) {
    try {
      std::filesystem::path p(data.annotations[static_cast<size_t>(i)].image_path);
      if (p.is_relative()) p = base / p;
      Tensor img = read_image(p.string());
      if (img.dim(1) != image_size || img.dim(2) != image_size) {
        img = kernels::resize_nearest(img, image_size, image_size);
      }
      data.images[static_cast<size_t>(i)] = std::move(img);
    } catch (...) {
      errors[static_cast<size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return data;
}

}  // namespace cdssd
