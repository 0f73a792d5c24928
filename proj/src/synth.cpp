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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "cdssd/data.hpp"
#include "cdssd/rng.hpp"

namespace cdssd {

namespace {

double quantize8(double v) { return std::lround(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

struct ShapeSpec {
  int class_id;  // 1 circle, 2 square, 3 triangle
  Box box;
  double color[3];
};

bool inside_shape(const ShapeSpec& s, double x, double y) {
  const double dx = x - s.box.cx, dy = y - s.box.cy;
  const double hw = s.box.w / 2, hh = s.box.h / 2;
  switch (s.class_id) {
    case 1:  // ellipse
      return (dx * dx) / (hw * hw) + (dy * dy) / (hh * hh) <= 1.0;
    case 2:  // rectangle
      return std::abs(dx) <= hw && std::abs(dy) <= hh;
    default: {  // isoceles triangle, apex at the top
      if (dy < -hh || dy > hh) return false;
      const double half_width_at_y = hw * (dy + hh) / s.box.h;
      return std::abs(dx) <= half_width_at_y;
    }
  }
}

std::string month_str(int year, int month0) {
  const int y = year + month0 / 12;
  const int m = month0 % 12 + 1;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", y, m);
  return buf;
}

}  // namespace

std::vector<SynthSample> synth_shapes(const SynthConfig& cfg) {
  if (cfg.count < 1) throw std::invalid_argument("synth_shapes: count must be >= 1");
  if (cfg.min_shapes < 1 || cfg.max_shapes < cfg.min_shapes) {
    throw std::invalid_argument("synth_shapes: bad shape count range");
  }
  const ClassMap classes = ClassMap::synthetic();
  std::vector<SynthSample> out;
  out.reserve(static_cast<size_t>(cfg.count));

  for (int idx = 0; idx < cfg.count; ++idx) {
    Rng rng(mix64(cfg.seed, static_cast<uint64_t>(idx)));
    const int s = cfg.image_size;
    SynthSample sample;
    sample.image = Tensor({3, s, s});

    // Light gray noise background.
    for (int y = 0; y < s; ++y) {
      for (int x = 0; x < s; ++x) {
        const double g = quantize8(0.45 + rng.uniform(0.0, 0.12));
        for (int c = 0; c < 3; ++c) sample.image.at(c, y, x) = g;
      }
    }

    const int want = cfg.min_shapes + rng.uniform_int(cfg.max_shapes - cfg.min_shapes + 1);
    std::vector<ShapeSpec> shapes;
    for (int n = 0; n < want; ++n) {
      bool placed = false;
      for (int attempt = 0; attempt < 40 && !placed; ++attempt) {
        ShapeSpec spec;
        spec.class_id = 1 + rng.uniform_int(classes.num_classes());
        const double w = rng.uniform(cfg.min_size, cfg.max_size);
        const double h = rng.uniform(std::max(cfg.min_size, 0.6 * w), std::min(cfg.max_size, 1.67 * w));
        spec.box.w = w;
        spec.box.h = h;
        spec.box.cx = rng.uniform(w / 2 + 0.01, 1.0 - w / 2 - 0.01);
        spec.box.cy = rng.uniform(h / 2 + 0.01, 1.0 - h / 2 - 0.01);
        bool ok = true;
        for (const auto& other : shapes) {
          if (iou(spec.box, other.box) > cfg.max_overlap_iou) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        // Saturated color, quantized to the 8-bit grid.
        const double hue = rng.uniform(0.0, 1.0) * 6.0;
        const double sat = rng.uniform(0.6, 1.0);
        const double val = rng.uniform(0.5, 1.0);
        const double c = val * sat;
        const double xx = c * (1.0 - std::abs(std::fmod(hue, 2.0) - 1.0));
        double rgb[3] = {0, 0, 0};
        const int sector = static_cast<int>(hue) % 6;
        const double cx2[6][3] = {{c, xx, 0}, {xx, c, 0}, {0, c, xx}, {0, xx, c}, {xx, 0, c}, {c, 0, xx}};
        for (int k = 0; k < 3; ++k) rgb[k] = cx2[sector][k] + (val - c);
        for (int k = 0; k < 3; ++k) spec.color[k] = quantize8(rgb[k]);
        shapes.push_back(spec);
        placed = true;
      }
    }

    // Rasterize in placement order (later shapes may occlude earlier ones
    // only up to the allowed bounding-box overlap).
    for (const auto& spec : shapes) {
      const int x0 = std::max(0, static_cast<int>(spec.box.x0() * s) - 1);
      const int x1 = std::min(s - 1, static_cast<int>(spec.box.x1() * s) + 1);
      const int y0 = std::max(0, static_cast<int>(spec.box.y0() * s) - 1);
      const int y1 = std::min(s - 1, static_cast<int>(spec.box.y1() * s) + 1);
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          if (inside_shape(spec, (x + 0.5) / s, (y + 0.5) / s)) {
            for (int c = 0; c < 3; ++c) sample.image.at(c, y, x) = spec.color[c];
          }
        }
      }
    }

    char id[32];
    std::snprintf(id, sizeof(id), "img%05d", idx);
    sample.annotation.image_id = id;
    sample.annotation.image_path = std::string(id) + ".ppm";
    const int month0 = cfg.start_month - 1 + rng.uniform_int(cfg.months);
    const int day = 1 + rng.uniform_int(28);
    char date[24];
    std::snprintf(date, sizeof(date), "%s-%02d", month_str(cfg.start_year, month0).c_str(), day);
    sample.annotation.timestamp = date;
    for (const auto& spec : shapes) {
      AnnotatedObject obj;
      obj.class_id = spec.class_id;
      obj.class_name = classes.name_of(spec.class_id);
      obj.box = spec.box;
      sample.annotation.objects.push_back(std::move(obj));
    }
    out.push_back(std::move(sample));
  }
  return out;
}

}  // namespace cdssd
