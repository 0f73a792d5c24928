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

#include <omp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdssd/checkpoint.hpp"
#include "cdssd/config.hpp"
#include "cdssd/eval.hpp"
#include "cdssd/image_io.hpp"
#include "cdssd/inference.hpp"
#include "cdssd/rng.hpp"
#include "cdssd/trainer.hpp"
#include "cdssd/trends.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cdssd;

namespace {

struct CommonArgs {
  std::string config_path;
  uint64_t seed = 7;
  bool seed_set = false;
  std::string out = "out";
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run config JSON (defaults to the desk profile)");
  cmd->add_option("--seed", args.seed, "seed for all randomness")->each([&](const std::string&) {
    args.seed_set = true;
  });
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--workers", args.workers, "thread cap (0 = library default)");
}

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig cfg = args.config_path.empty() ? RunConfig() : load_run_config(args.config_path);
  if (args.seed_set || args.config_path.empty()) {
    cfg.pretrain_cfg.seed = args.seed;
    cfg.train_cfg.seed = args.seed;
  }
  if (args.workers > 0) omp_set_num_threads(args.workers);
  return cfg;
}

std::string run_id(const std::string& subcommand, uint64_t seed, const std::string& extra) {
  uint64_t h = mix64(seed, 0xC0DE);
  for (char c : subcommand) h = mix64(h, static_cast<uint64_t>(c));
  for (char c : extra) h = mix64(h, static_cast<uint64_t>(c));
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%016lx%016lx%08x", static_cast<unsigned long>(h),
                static_cast<unsigned long>(mix64(h)), static_cast<unsigned>(mix64(h, 1) & 0xffffffff));
  return buf;
}

class Manifest {
 public:
  Manifest(const std::string& subcommand, const CommonArgs& args, const RunConfig& cfg)
      : start_(std::chrono::steady_clock::now()), out_dir_(args.out) {
    j_["subcommand"] = subcommand;
    j_["config_path"] = args.config_path;
    j_["seed"] = args.seed;
    j_["run_id"] = run_id(subcommand, args.seed, run_config_json(cfg));
  }

  void input(const std::string& key, const std::string& path) { j_["inputs"][key] = path; }
  void output(const std::string& key, const std::string& path) { j_["outputs"][key] = path; }

  void write() {
    j_["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream os(out_dir_ + "/manifest_" + j_["subcommand"].get<std::string>() + ".json");
    os << j_.dump(2) << "\n";
  }

 private:
  json j_;
  std::chrono::steady_clock::time_point start_;
  std::string out_dir_;
};

ClassMap class_map_from_flag(const std::string& flag) {
  if (flag == "synthetic") return ClassMap::synthetic();
  if (flag == "fashion24") return ClassMap::fashion24();
  std::ifstream is(flag);
  if (!is) throw std::runtime_error("cannot open class list " + flag);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) names.push_back(line);
  }
  return ClassMap(names);
}

void write_anchor_spec(const std::string& path, const std::vector<FeatureMapSpec>& layout,
                       const std::vector<double>& ratios) {
  json layers = json::array();
  for (const auto& spec : layout) {
    layers.push_back({{"layer", spec.layer_index},
                      {"m", spec.m},
                      {"n", spec.n},
                      {"k", spec.K},
                      {"scale", spec.scale},
                      {"box_pool", spec.box_pool_k},
                      {"anchors", spec.anchor_count()}});
  }
  int total = 0;
  for (const auto& spec : layout) total += spec.anchor_count();
  json j{{"aspect_ratios", ratios}, {"layout", layers}, {"total_anchors", total}};
  std::ofstream os(path);
  os << j.dump(2) << "\n";
}

AnchorSet load_anchor_spec(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open anchor spec " + path);
  json j = json::parse(is);
  std::vector<double> ratios = j.at("aspect_ratios").get<std::vector<double>>();
  std::vector<FeatureMapSpec> layout;
  for (const auto& layer : j.at("layout")) {
    FeatureMapSpec spec;
    spec.layer_index = layer.at("layer").get<int>();
    spec.m = layer.at("m").get<int>();
    spec.n = layer.at("n").get<int>();
    spec.K = layer.at("k").get<int>();
    spec.scale = layer.at("scale").get<double>();
    spec.box_pool_k = layer.at("box_pool").get<int>();
    layout.push_back(spec);
  }
  return generate_default_boxes(layout, ratios);
}

int cmd_synth_data(const CommonArgs& args, int train_count, int test_count, int image_size,
                   const std::string& start_month, int months) {
  RunConfig cfg = resolve_config(args);
  fs::create_directories(args.out + "/images");
  Manifest manifest("synth-data", args, cfg);

  SynthConfig synth;
  synth.count = train_count + test_count;
  synth.image_size = image_size > 0 ? image_size : cfg.net.input_size;
  synth.seed = args.seed;
  synth.months = months;
  if (start_month.size() == 7 && start_month[4] == '-') {
    synth.start_year = std::stoi(start_month.substr(0, 4));
    synth.start_month = std::stoi(start_month.substr(5, 2));
  } else if (!start_month.empty()) {
    throw std::runtime_error("--start-month must look like 2018-01");
  }

  std::vector<SynthSample> samples = synth_shapes(synth);
  std::vector<Annotation> train_set, test_set;
  for (int i = 0; i < synth.count; ++i) {
    auto& sample = samples[static_cast<size_t>(i)];
    const std::string rel = "images/" + sample.annotation.image_id + ".ppm";
    write_image(args.out + "/" + rel, sample.image);
    sample.annotation.image_path = rel;
    (i < train_count ? train_set : test_set).push_back(sample.annotation);
  }
  save_annotations(args.out + "/train.jsonl", train_set);
  save_annotations(args.out + "/test.jsonl", test_set);
  manifest.output("train", args.out + "/train.jsonl");
  manifest.output("test", args.out + "/test.jsonl");
  manifest.output("images", args.out + "/images");
  manifest.write();
  std::cout << "wrote " << train_count << " train / " << test_count << " test images to "
            << args.out << "\n";
  return 0;
}

int cmd_anchors_stats(const CommonArgs& args, const std::string& annotations_path,
                      int bins, const std::string& classes_flag) {
  RunConfig cfg = resolve_config(args);
  const ClassMap classes = class_map_from_flag(classes_flag);
  const auto annotations = load_annotations(annotations_path, classes);
  std::vector<Box> boxes;
  for (const auto& ann : annotations) {
    for (const auto& obj : ann.objects) boxes.push_back(obj.box);
  }
  const int b = bins > 0 ? bins : cfg.net.anchors_per_cell;
  const auto ratios = compute_aspect_ratio_bins(boxes, b);
  cfg.net.anchors_per_cell = b;
  const auto layout = head_layout(cfg.net);

  json layers = json::array();
  int total = 0;
  for (const auto& spec : layout) {
    layers.push_back({{"layer", spec.layer_index},
                      {"m", spec.m},
                      {"n", spec.n},
                      {"k", spec.K},
                      {"scale", spec.scale},
                      {"box_pool", spec.box_pool_k},
                      {"anchors", spec.anchor_count()}});
    total += spec.anchor_count();
  }
  json out{{"aspect_ratio_bins", ratios},
           {"num_ground_truth_boxes", boxes.size()},
           {"per_layer", layers},
           {"total_anchors", total}};
  std::cout << out.dump(2) << "\n";
  if (!args.out.empty()) {
    fs::create_directories(args.out);
    Manifest manifest("anchors-stats", args, cfg);
    manifest.input("annotations", annotations_path);
    std::ofstream os(args.out + "/anchors_stats.json");
    os << out.dump(2) << "\n";
    manifest.output("stats", args.out + "/anchors_stats.json");
    manifest.write();
  }
  return 0;
}

int cmd_pretrain(const CommonArgs& args, const std::string& data_path,
                 const std::string& classes_flag) {
  RunConfig cfg = resolve_config(args);
  fs::create_directories(args.out);
  Manifest manifest("pretrain", args, cfg);
  manifest.input("data", data_path);

  const ClassMap classes = class_map_from_flag(classes_flag);
  DetectionDataset data = load_detection_dataset(data_path, classes, cfg.net.input_size);
  Network net = make_network(cfg.net, NetMode::kPretrain, cfg.pretrain_cfg.seed);
  const LossLog log = pretrain(net, data.images, cfg.pretrain_cfg);

  save_checkpoint(args.out + "/pretrain.ckpt", net.params);
  write_loss_log_csv(args.out + "/pretrain_log.csv", log);
  save_run_config(args.out + "/config.json", cfg);
  manifest.output("checkpoint", args.out + "/pretrain.ckpt");
  manifest.output("log", args.out + "/pretrain_log.csv");
  manifest.write();
  std::cout << "pretrained " << cfg.pretrain_cfg.total_steps() << " steps; final loss "
            << (log.empty() ? 0.0 : log.back().total) << "\n";
  return 0;
}

int cmd_train(const CommonArgs& args, const std::string& data_path, const std::string& init_path,
              const std::string& classes_flag) {
  RunConfig cfg = resolve_config(args);
  fs::create_directories(args.out);
  Manifest manifest("train", args, cfg);
  manifest.input("data", data_path);

  const ClassMap classes = class_map_from_flag(classes_flag);
  if (classes.num_classes() != cfg.net.num_classes) {
    throw std::runtime_error("config expects " + std::to_string(cfg.net.num_classes) +
                             " classes but class map has " + std::to_string(classes.num_classes()));
  }
  DetectionDataset data = load_detection_dataset(data_path, classes, cfg.net.input_size);

  std::vector<Box> gt_boxes;
  for (const auto& ann : data.annotations) {
    for (const auto& obj : ann.objects) gt_boxes.push_back(obj.box);
  }
  const auto ratios = compute_aspect_ratio_bins(gt_boxes, cfg.net.anchors_per_cell);
  const AnchorSet anchors = generate_default_boxes(head_layout(cfg.net), ratios);

  Network net = make_network(cfg.net, NetMode::kDetect, cfg.train_cfg.seed);
  if (!init_path.empty()) {
    load_params(net, load_checkpoint(init_path));
    manifest.input("init", init_path);
  }
  const LossLog log = finetune(net, data, anchors, cfg.train_cfg);

  save_checkpoint(args.out + "/model.ckpt", net.params);
  write_anchor_spec(args.out + "/anchors.json", anchors.layout, ratios);
  save_run_config(args.out + "/config.json", cfg);
  write_loss_log_csv(args.out + "/train_log.csv", log);
  manifest.output("checkpoint", args.out + "/model.ckpt");
  manifest.output("anchors", args.out + "/anchors.json");
  manifest.output("log", args.out + "/train_log.csv");
  manifest.write();
  std::cout << "trained " << cfg.train_cfg.total_steps() << " steps; final loss "
            << (log.empty() ? 0.0 : log.back().total) << "\n";
  return 0;
}

int cmd_detect(const CommonArgs& args, const std::string& model_dir, const std::string& input_path,
               const std::vector<std::string>& image_paths, const std::string& classes_flag,
               double conf, bool annotate) {
  CommonArgs margs = args;
  margs.config_path = model_dir + "/config.json";
  RunConfig cfg = resolve_config(margs);
  fs::create_directories(args.out);
  Manifest manifest("detect", args, cfg);
  manifest.input("model", model_dir);

  const ClassMap classes = class_map_from_flag(classes_flag);
  Network net = make_network(cfg.net, NetMode::kDetect, 0);
  load_params(net, load_checkpoint(model_dir + "/model.ckpt"));
  const AnchorSet anchors = load_anchor_spec(model_dir + "/anchors.json");

  DetectParams params = cfg.detect_params;
  params.conf_threshold = conf;

  DetectionDataset data;
  if (!input_path.empty()) {
    data = load_detection_dataset(input_path, classes, cfg.net.input_size);
    manifest.input("annotations", input_path);
  } else {
    for (const auto& p : image_paths) {
      Tensor img = read_image(p);
      if (img.dim(1) != cfg.net.input_size || img.dim(2) != cfg.net.input_size) {
        img = kernels::resize_nearest(img, cfg.net.input_size, cfg.net.input_size);
      }
      Annotation ann;
      ann.image_path = p;
      ann.image_id = fs::path(p).stem().string();
      data.images.push_back(std::move(img));
      data.annotations.push_back(std::move(ann));
    }
  }

  const std::vector<Detection> dets = detect_dataset(net, anchors, data.images, data.annotations, params);
  save_detections(args.out + "/detections.jsonl", dets, classes);
  manifest.output("detections", args.out + "/detections.jsonl");

  if (annotate) {
    fs::create_directories(args.out + "/annotated");
    for (size_t i = 0; i < data.images.size(); ++i) {
      Tensor img = data.images[i];
      for (const auto& d : dets) {
        if (d.image_id != data.annotations[i].image_id) continue;
        draw_box(img, d.box, 1.0, 0.1, 0.1);
      }
      write_image(args.out + "/annotated/" + data.annotations[i].image_id + ".ppm", img);
    }
    manifest.output("annotated", args.out + "/annotated");
  }
  manifest.write();
  std::cout << dets.size() << " detections over " << data.images.size() << " images\n";
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& detections_path,
             const std::string& annotations_path, const std::string& classes_flag, double iou_min) {
  RunConfig cfg = resolve_config(args);
  fs::create_directories(args.out);
  Manifest manifest("eval", args, cfg);
  manifest.input("detections", detections_path);
  manifest.input("annotations", annotations_path);

  const ClassMap classes = class_map_from_flag(classes_flag);
  const auto dets = load_detections(detections_path);
  const auto annotations = load_annotations(annotations_path, classes);
  const auto gts = flatten_ground_truth(annotations);
  const EvalReport report = evaluate(dets, gts, classes, iou_min);

  const std::string text = report_text(report, classes);
  std::cout << text;
  std::ofstream(args.out + "/eval_report.txt") << text;
  std::ofstream(args.out + "/eval_report.json") << report_json(report, classes) << "\n";
  manifest.output("report_json", args.out + "/eval_report.json");
  manifest.output("report_text", args.out + "/eval_report.txt");
  manifest.write();
  return 0;
}

int cmd_trends(const CommonArgs& args, const std::string& detections_path,
               const std::string& images_dir, const std::string& classes_flag, double min_score) {
  RunConfig cfg = resolve_config(args);
  fs::create_directories(args.out);
  Manifest manifest("trends", args, cfg);
  manifest.input("detections", detections_path);

  const ClassMap classes = class_map_from_flag(classes_flag);
  const auto dets = load_detections(detections_path);
  TrendTable table = aggregate_monthly(dets, min_score);

  std::map<std::string, Tensor> image_cache;
  if (!images_dir.empty()) {
    manifest.input("images", images_dir);
    fill_colors(table, dets,
                [&](const std::string& image_id) -> const Tensor* {
                  auto it = image_cache.find(image_id);
                  if (it == image_cache.end()) {
                    for (const char* ext : {".ppm", ".png", ".pgm"}) {
                      const std::string path = images_dir + "/" + image_id + ext;
                      if (fs::exists(path)) {
                        it = image_cache.emplace(image_id, read_image(path)).first;
                        return &it->second;
                      }
                    }
                    return nullptr;
                  }
                  return &it->second;
                },
                min_score);
  }

  write_trends_csv(args.out + "/trends.csv", table, classes);
  std::ofstream(args.out + "/trends.json") << trends_json(table, classes) << "\n";
  manifest.output("csv", args.out + "/trends.csv");
  manifest.output("json", args.out + "/trends.json");
  manifest.write();

  std::ifstream csv(args.out + "/trends.csv");
  std::cout << csv.rdbuf();
  return 0;
}

int cmd_import_openimages(const CommonArgs& args, const std::string& csv_path,
                          const std::string& labelmap_path, const std::string& images_dir,
                          const std::string& classes_flag) {
  RunConfig cfg = resolve_config(args);
  fs::create_directories(args.out);
  Manifest manifest("import-openimages", args, cfg);
  manifest.input("csv", csv_path);
  manifest.input("labelmap", labelmap_path);
  const ClassMap classes = class_map_from_flag(classes_flag);
  const auto annotations = convert_open_images_csv(csv_path, labelmap_path, classes, images_dir);
  save_annotations(args.out + "/annotations.jsonl", annotations);
  manifest.output("annotations", args.out + "/annotations.jsonl");
  manifest.write();
  std::cout << "imported " << annotations.size() << " images\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CDSSD: convolution-deconvolution single-shot detector"};
  app.require_subcommand(1);

  CommonArgs common;

  auto* synth = app.add_subcommand("synth-data", "generate the synthetic shapes dataset");
  add_common(synth, common);
  int train_count = 500, test_count = 100, image_size = 0, months = 12;
  std::string start_month = "2018-01";
  synth->add_option("--train-count", train_count, "training images");
  synth->add_option("--test-count", test_count, "test images");
  synth->add_option("--image-size", image_size, "image side (default: config input size)");
  synth->add_option("--start-month", start_month, "first timestamp month, YYYY-MM");
  synth->add_option("--months", months, "number of months timestamps span");

  auto* astats = app.add_subcommand("anchors-stats", "aspect-ratio bins and anchor counts");
  add_common(astats, common);
  std::string annotations_path, classes_flag = "synthetic";
  int bins = 0;
  astats->add_option("--annotations", annotations_path, "annotation JSONL")->required();
  astats->add_option("--bins", bins, "number of aspect-ratio bins (default: config)");
  astats->add_option("--classes", classes_flag, "synthetic | fashion24 | <file>");

  auto* pre = app.add_subcommand("pretrain", "unsupervised autoencoder pretraining");
  add_common(pre, common);
  std::string data_path;
  std::string pre_classes = "synthetic";
  pre->add_option("--data", data_path, "annotation JSONL (images used unlabeled)")->required();
  pre->add_option("--classes", pre_classes, "synthetic | fashion24 | <file>");

  auto* train = app.add_subcommand("train", "detection fine-tuning");
  add_common(train, common);
  std::string train_data, init_path, train_classes = "synthetic";
  train->add_option("--data", train_data, "training annotation JSONL")->required();
  train->add_option("--init", init_path, "pretrain checkpoint to start from");
  train->add_option("--classes", train_classes, "synthetic | fashion24 | <file>");

  auto* det = app.add_subcommand("detect", "run detection");
  add_common(det, common);
  std::string model_dir, det_input, det_classes = "synthetic";
  std::vector<std::string> det_images;
  double det_conf = 0.5;
  bool det_annotate = false;
  det->add_option("--model", model_dir, "model directory from train")->required();
  det->add_option("--input", det_input, "annotation JSONL naming the images");
  det->add_option("--images", det_images, "image files");
  det->add_option("--classes", det_classes, "synthetic | fashion24 | <file>");
  det->add_option("--conf", det_conf, "confidence threshold (0.01 for evaluation runs)");
  det->add_flag("--annotate", det_annotate, "write images with boxes burned in");

  auto* ev = app.add_subcommand("eval", "AP / mAP / precision-at-recall report");
  add_common(ev, common);
  std::string eval_dets, eval_annotations, eval_classes = "synthetic";
  double eval_iou = 0.5;
  ev->add_option("--detections", eval_dets, "detections JSONL")->required();
  ev->add_option("--annotations", eval_annotations, "ground-truth JSONL")->required();
  ev->add_option("--classes", eval_classes, "synthetic | fashion24 | <file>");
  ev->add_option("--iou", eval_iou, "matching IoU threshold");

  auto* tr = app.add_subcommand("trends", "monthly category and color trends");
  add_common(tr, common);
  std::string trend_dets, trend_images, trend_classes = "synthetic";
  double min_score = 0.5;
  tr->add_option("--detections", trend_dets, "detections JSONL")->required();
  tr->add_option("--images", trend_images, "image directory for dominant colors");
  tr->add_option("--classes", trend_classes, "synthetic | fashion24 | <file>");
  tr->add_option("--min-score", min_score, "score floor");

  auto* oi = app.add_subcommand("import-openimages", "convert Open Images box CSV");
  add_common(oi, common);
  std::string oi_csv, oi_labelmap, oi_images, oi_classes = "fashion24";
  oi->add_option("--csv", oi_csv, "Open Images box CSV")->required();
  oi->add_option("--labelmap", oi_labelmap, "label id to class name map (TSV)")->required();
  oi->add_option("--images-dir", oi_images, "directory the image files live in");
  oi->add_option("--classes", oi_classes, "synthetic | fashion24 | <file>");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (synth->parsed()) {
      return cmd_synth_data(common, train_count, test_count, image_size, start_month, months);
    }
    if (astats->parsed()) return cmd_anchors_stats(common, annotations_path, bins, classes_flag);
    if (pre->parsed()) return cmd_pretrain(common, data_path, pre_classes);
    if (train->parsed()) return cmd_train(common, train_data, init_path, train_classes);
    if (det->parsed()) {
      return cmd_detect(common, model_dir, det_input, det_images, det_classes, det_conf, det_annotate);
    }
    if (ev->parsed()) return cmd_eval(common, eval_dets, eval_annotations, eval_classes, eval_iou);
    if (tr->parsed()) return cmd_trends(common, trend_dets, trend_images, trend_classes, min_score);
    if (oi->parsed()) return cmd_import_openimages(common, oi_csv, oi_labelmap, oi_images, oi_classes);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
