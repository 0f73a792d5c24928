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

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "cdssd/inference.hpp"

namespace cdssd {

constexpr int kColorBins = 27;  // 3x3x3 RGB histogram

struct TrendRow {
  std::string year_month;  // "YYYY-MM"
  int class_id = 0;
  int count = 0;
  double share = 0.0;  // of the month's detections
  std::string dominant_color;
  std::array<int64_t, kColorBins> color_histogram{};
};

struct TrendTable {
  std::vector<TrendRow> rows;  // sorted by (year_month, class_id)
  int skipped_no_timestamp = 0;
};

/// Groups detections with score >= min_score by (calendar month, class).
/// Detections without a timestamp are skipped and counted. Permutation
/// invariant over the input order.
TrendTable aggregate_monthly(const std::vector<Detection>& detections, double min_score = 0.5);

/// Quantizes the pixels inside the box into a 3x3x3 RGB histogram and names
/// the dominant bin (ties by lower bin index) by the nearest of 16 anchor
/// colors. Throws for a box smaller than one pixel.
std::pair<std::string, std::array<int64_t, kColorBins>> dominant_color(const Tensor& image,
                                                                       const Box& box);

/// Fills dominant colors into an aggregated table by summing per-detection
/// histograms; image_of maps an image id to its pixels (may return null when
/// the image is unavailable; such detections contribute no color).
void fill_colors(TrendTable& table, const std::vector<Detection>& detections,
                 const std::function<const Tensor*(const std::string&)>& image_of,
                 double min_score = 0.5);

/// Name of the anchor color nearest to an RGB triple in [0,1]^3.
std::string nearest_color_name(double r, double g, double b);

/// CSV with header year_month,class,count,share,dominant_color.
void write_trends_csv(const std::string& path, const TrendTable& table, const ClassMap& classes);

std::string trends_json(const TrendTable& table, const ClassMap& classes);

}  // namespace cdssd
