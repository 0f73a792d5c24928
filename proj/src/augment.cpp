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

#include "cdssd/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cdssd {

void AugmentConfig::validate() const {
  if (patch_scale_min <= 0 || patch_scale_min > patch_scale_max || patch_scale_max > 1.0) {
    throw std::invalid_argument("augment: patch scale range must satisfy 0 < min <= max <= 1");
  }
  if (patch_aspect_min <= 0 || patch_aspect_min > patch_aspect_max) {
    throw std::invalid_argument("augment: patch aspect range ill-ordered");
  }
  for (double p : {flip_prob, blackout_prob, photometric_prob}) {
    if (p < 0 || p > 1) throw std::invalid_argument("augment: probabilities must be in [0,1]");
  }
  if (blackout_frac < 0 || blackout_frac >= 1) {
    throw std::invalid_argument("augment: blackout_frac must be in [0,1)");
  }
  for (double m : min_ious) {
    if (m <= 0 || m > 1) throw std::invalid_argument("augment: min IoU levels must be in (0,1]");
  }
}

namespace {

// Nearest-pixel crop of the fractional rectangle (x0,y0,w,h), resized to the
// original resolution.
Tensor crop_resize(const Tensor& image, double x0, double y0, double pw, double ph) {
  const int c = image.dim(0), h = image.dim(1), w = image.dim(2);
  Tensor out(image.shape);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      const int sy = std::clamp(static_cast<int>((y0 + (y + 0.5) * ph / h) * h), 0, h - 1);
      for (int x = 0; x < w; ++x) {
        const int sx = std::clamp(static_cast<int>((x0 + (x + 0.5) * pw / w) * w), 0, w - 1);
        out.at(ch, y, x) = image.at(ch, sy, sx);
      }
    }
  }
  return out;
}

}  // namespace

Sample sample_patch(const Sample& in, const AugmentConfig& cfg, Rng& rng) {
  if (in.gts.empty()) throw std::invalid_argument("sample_patch: at least one ground truth required");
  const int branch = rng.uniform_int(static_cast<int>(cfg.min_ious.size()) + 1);
  if (branch == 0) return in;
  const double min_iou = cfg.min_ious[static_cast<size_t>(branch) - 1];

  for (int attempt = 0; attempt < cfg.patch_attempts; ++attempt) {
    const double area = rng.uniform(cfg.patch_scale_min, cfg.patch_scale_max);
    double aspect = rng.uniform(cfg.patch_aspect_min, cfg.patch_aspect_max);
    if (rng.bernoulli(0.5)) aspect = 1.0 / aspect;  // either orientation
    const double pw = std::sqrt(area * aspect);
    const double ph = std::sqrt(area / aspect);
    if (pw > 1.0 || ph > 1.0) continue;
    const double x0 = rng.uniform(0.0, 1.0 - pw);
    const double y0 = rng.uniform(0.0, 1.0 - ph);
    const Box patch{x0 + pw / 2, y0 + ph / 2, pw, ph};

    double best = 0.0;
    for (const auto& gt : in.gts) best = std::max(best, iou(patch, gt.box));
    if (best < min_iou) continue;

    Sample out;
    out.image = crop_resize(in.image, x0, y0, pw, ph);
    for (const auto& gt : in.gts) {
      const double cx = (gt.box.cx - x0) / pw;
      const double cy = (gt.box.cy - y0) / ph;
      if (cx < 0.0 || cx > 1.0 || cy < 0.0 || cy > 1.0) continue;  // center left the patch
      Box remapped{cx, cy, gt.box.w / pw, gt.box.h / ph};
      remapped = clip_box(remapped);
      if (remapped.w <= 1e-9 || remapped.h <= 1e-9) continue;
      out.gts.push_back({remapped, gt.class_id});
    }
    if (out.gts.empty()) continue;  // never emit an image with no boxes
    return out;
  }
  return in;
}

Sample hflip(const Sample& in) {
  Sample out;
  out.image = Tensor(in.image.shape);
  const int c = in.image.dim(0), h = in.image.dim(1), w = in.image.dim(2);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out.image.at(ch, y, x) = in.image.at(ch, y, w - 1 - x);
    }
  }
  out.gts = in.gts;
  for (auto& gt : out.gts) gt.box.cx = 1.0 - gt.box.cx;
  return out;
}

void blackout(Tensor& image, double frac, Rng& rng) {
  const int h = image.dim(1), w = image.dim(2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (rng.bernoulli(frac)) {
        for (int c = 0; c < image.dim(0); ++c) image.at(c, y, x) = 0.0;
      }
    }
  }
}

namespace {

Tensor conv3_clamped(const Tensor& image, const double k[9], double bias) {
  const int c = image.dim(0), h = image.dim(1), w = image.dim(2);
  Tensor out(image.shape);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = bias;
        for (int u = -1; u <= 1; ++u) {
          for (int v = -1; v <= 1; ++v) {
            const int yy = std::clamp(y + u, 0, h - 1);
            const int xx = std::clamp(x + v, 0, w - 1);
            acc += k[(u + 1) * 3 + (v + 1)] * image.at(ch, yy, xx);
          }
        }
        out.at(ch, y, x) = std::clamp(acc, 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace

Tensor gaussian_blur3(const Tensor& image) {
  static const double k[9] = {1 / 16.0, 2 / 16.0, 1 / 16.0, 2 / 16.0, 4 / 16.0,
                              2 / 16.0, 1 / 16.0, 2 / 16.0, 1 / 16.0};
  return conv3_clamped(image, k, 0.0);
}

Tensor emboss3(const Tensor& image) {
  static const double k[9] = {-2, -1, 0, -1, 1, 1, 0, 1, 2};
  return conv3_clamped(image, k, 0.0);
}

Tensor edge_prominence(const Tensor& image) {
  const Tensor blurred = gaussian_blur3(image);
  Tensor out(image.shape);
  for (size_t i = 0; i < image.data.size(); ++i) {
    out.data[i] = std::clamp(image.data[i] + 0.5 * (image.data[i] - blurred.data[i]), 0.0, 1.0);
  }
  return out;
}

namespace {

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  v = mx;
  const double d = mx - mn;
  s = mx > 0 ? d / mx : 0.0;
  if (d <= 0) {
    h = 0;
    return;
  }
  if (mx == r) {
    h = std::fmod((g - b) / d, 6.0);
  } else if (mx == g) {
    h = (b - r) / d + 2.0;
  } else {
    h = (r - g) / d + 4.0;
  }
  h /= 6.0;
  if (h < 0) h += 1.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  h = std::fmod(h, 1.0);
  if (h < 0) h += 1.0;
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double rr = 0, gg = 0, bb = 0;
  if (hp < 1) {
    rr = c; gg = x;
  } else if (hp < 2) {
    rr = x; gg = c;
  } else if (hp < 3) {
    gg = c; bb = x;
  } else if (hp < 4) {
    gg = x; bb = c;
  } else if (hp < 5) {
    rr = x; bb = c;
  } else {
    rr = c; bb = x;
  }
  const double m = v - c;
  r = rr + m;
  g = gg + m;
  b = bb + m;
}

}  // namespace

void color_jitter(Tensor& image, double strength, Rng& rng) {
  const double hue_shift = rng.uniform(-strength, strength);
  const double sat_mul = 1.0 + rng.uniform(-strength, strength);
  const double con_mul = 1.0 + rng.uniform(-strength, strength);
  const int h = image.dim(1), w = image.dim(2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double hh, ss, vv;
      rgb_to_hsv(image.at(0, y, x), image.at(1, y, x), image.at(2, y, x), hh, ss, vv);
      hh += hue_shift;
      ss = std::clamp(ss * sat_mul, 0.0, 1.0);
      double r, g, b;
      hsv_to_rgb(hh, ss, vv, r, g, b);
      image.at(0, y, x) = std::clamp((r - 0.5) * con_mul + 0.5, 0.0, 1.0);
      image.at(1, y, x) = std::clamp((g - 0.5) * con_mul + 0.5, 0.0, 1.0);
      image.at(2, y, x) = std::clamp((b - 0.5) * con_mul + 0.5, 0.0, 1.0);
    }
  }
}

Sample augment_sample(const Sample& in, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  Sample out = (cfg.crop && !in.gts.empty()) ? sample_patch(in, cfg, rng) : in;
  if (rng.bernoulli(cfg.flip_prob)) out = hflip(out);
  if (cfg.blur && rng.bernoulli(cfg.photometric_prob)) out.image = gaussian_blur3(out.image);
  if (cfg.emboss && rng.bernoulli(cfg.photometric_prob)) out.image = emboss3(out.image);
  if (cfg.edge && rng.bernoulli(cfg.photometric_prob)) out.image = edge_prominence(out.image);
  if (cfg.color_jitter && rng.bernoulli(cfg.photometric_prob)) {
    color_jitter(out.image, cfg.color_jitter_strength, rng);
  }
  if (rng.bernoulli(cfg.blackout_prob)) blackout(out.image, cfg.blackout_frac, rng);
  return out;
}

}  // namespace cdssd
