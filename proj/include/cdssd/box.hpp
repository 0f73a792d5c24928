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

#include <algorithm>

namespace cdssd {

/// Axis-aligned rectangle in normalized image coordinates: center (cx,cy),
/// width w, height h, all in [0,1] for valid boxes.
struct Box {
  double cx = 0, cy = 0, w = 0, h = 0;

  double x0() const { return cx - w / 2; }
  double y0() const { return cy - h / 2; }
  double x1() const { return cx + w / 2; }
  double y1() const { return cy + h / 2; }
  double area() const { return w * h; }

  static Box from_corners(double x0, double y0, double x1, double y1) {
    return Box{(x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0};
  }
};

/// Jaccard overlap: intersection area over union area. 0 for disjoint boxes.
inline double iou(const Box& a, const Box& b) {
  const double ix0 = std::max(a.x0(), b.x0());
  const double iy0 = std::max(a.y0(), b.y0());
  const double ix1 = std::min(a.x1(), b.x1());
  const double iy1 = std::min(a.y1(), b.y1());
  const double iw = ix1 - ix0, ih = iy1 - iy0;
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

/// Intersects the box with the unit square.
inline Box clip_box(const Box& b) {
  const double x0 = std::clamp(b.x0(), 0.0, 1.0);
  const double y0 = std::clamp(b.y0(), 0.0, 1.0);
  const double x1 = std::clamp(b.x1(), 0.0, 1.0);
  const double y1 = std::clamp(b.y1(), 0.0, 1.0);
  return Box::from_corners(x0, y0, x1, y1);
}

}  // namespace cdssd
