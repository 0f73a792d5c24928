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

#include "cdssd/trends.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace cdssd {

namespace {

struct NamedColor {
  const char* name;
  double r, g, b;
};

// 16 anchor colors, sRGB values scaled to [0,1].
const NamedColor kColors[16] = {
    {"black", 0.0, 0.0, 0.0},       {"white", 1.0, 1.0, 1.0},
    {"gray", 0.50, 0.50, 0.50},     {"red", 1.0, 0.0, 0.0},
    {"green", 0.0, 0.50, 0.0},      {"blue", 0.0, 0.0, 1.0},
    {"yellow", 1.0, 1.0, 0.0},      {"orange", 1.0, 0.65, 0.0},
    {"purple", 0.50, 0.0, 0.50},    {"pink", 1.0, 0.75, 0.80},
    {"brown", 0.65, 0.16, 0.16},    {"plum", 0.87, 0.63, 0.87},
    {"navy", 0.0, 0.0, 0.50},       {"teal", 0.0, 0.50, 0.50},
    {"olive", 0.50, 0.50, 0.0},     {"beige", 0.96, 0.96, 0.86},
};

bool parse_year_month(const std::string& ts, std::string& out) {
  // Expect ISO-8601 date: YYYY-MM-DD (or at least YYYY-MM).
  if (ts.size() < 7 || ts[4] != '-') return false;
  for (int i : {0, 1, 2, 3, 5, 6}) {
    if (!std::isdigit(static_cast<unsigned char>(ts[static_cast<size_t>(i)]))) return false;
  }
  out = ts.substr(0, 7);
  return true;
}

}  // namespace

std::string nearest_color_name(double r, double g, double b) {
  double best = 1e9;
  const char* name = kColors[0].name;
  for (const auto& c : kColors) {
    const double d = (r - c.r) * (r - c.r) + (g - c.g) * (g - c.g) + (b - c.b) * (b - c.b);
    if (d < best) {
      best = d;
      name = c.name;
    }
  }
  return name;
}

TrendTable aggregate_monthly(const std::vector<Detection>& detections, double min_score) {
  std::map<std::pair<std::string, int>, int> counts;
  std::map<std::string, int> month_totals;
  TrendTable table;
  for (const auto& d : detections) {
    if (d.score < min_score) continue;
    std::string ym;
    if (!d.timestamp || !parse_year_month(*d.timestamp, ym)) {
      ++table.skipped_no_timestamp;
      continue;
    }
    ++counts[{ym, d.class_id}];
    ++month_totals[ym];
  }
  for (const auto& [key, count] : counts) {
    TrendRow row;
    row.year_month = key.first;
    row.class_id = key.second;
    row.count = count;
    row.share = static_cast<double>(count) / month_totals[key.first];
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::pair<std::string, std::array<int64_t, kColorBins>> dominant_color(const Tensor& image,
                                                                       const Box& box) {
  const int h = image.dim(1), w = image.dim(2);
  const int x0 = std::max(0, static_cast<int>(std::floor(box.x0() * w)));
  const int y0 = std::max(0, static_cast<int>(std::floor(box.y0() * h)));
  const int x1 = std::min(w, static_cast<int>(std::ceil(box.x1() * w)));
  const int y1 = std::min(h, static_cast<int>(std::ceil(box.y1() * h)));
  if (x1 <= x0 || y1 <= y0) {
    throw std::invalid_argument("dominant_color: box does not cover a full pixel");
  }
  std::array<int64_t, kColorBins> hist{};
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const int br = std::min(2, static_cast<int>(image.at(0, y, x) * 3.0));
      const int bg = std::min(2, static_cast<int>(image.at(1, y, x) * 3.0));
      const int bb = std::min(2, static_cast<int>(image.at(2, y, x) * 3.0));
      ++hist[static_cast<size_t>(br * 9 + bg * 3 + bb)];
    }
  }
  int best = 0;
  for (int i = 1; i < kColorBins; ++i) {
    if (hist[static_cast<size_t>(i)] > hist[static_cast<size_t>(best)]) best = i;
  }
  const double r = (best / 9 + 0.5) / 3.0;
  const double g = (best / 3 % 3 + 0.5) / 3.0;
  const double b = (best % 3 + 0.5) / 3.0;
  return {nearest_color_name(r, g, b), hist};
}

void fill_colors(TrendTable& table, const std::vector<Detection>& detections,
                 const std::function<const Tensor*(const std::string&)>& image_of,
                 double min_score) {
  std::map<std::pair<std::string, int>, size_t> row_of;
  for (size_t i = 0; i < table.rows.size(); ++i) {
    row_of[{table.rows[i].year_month, table.rows[i].class_id}] = i;
  }
  for (const auto& d : detections) {
    if (d.score < min_score || !d.timestamp) continue;
    std::string ym;
    if (!parse_year_month(*d.timestamp, ym)) continue;
    const auto it = row_of.find({ym, d.class_id});
    if (it == row_of.end()) continue;
    const Tensor* image = image_of(d.image_id);
    if (!image) continue;
    const auto [name, hist] = dominant_color(*image, d.box);
    auto& row = table.rows[it->second];
    for (int i = 0; i < kColorBins; ++i) row.color_histogram[static_cast<size_t>(i)] += hist[static_cast<size_t>(i)];
  }
  for (auto& row : table.rows) {
    int best = 0;
    int64_t total = 0;
    for (int i = 0; i < kColorBins; ++i) {
      total += row.color_histogram[static_cast<size_t>(i)];
      if (row.color_histogram[static_cast<size_t>(i)] > row.color_histogram[static_cast<size_t>(best)]) best = i;
    }
    if (total == 0) continue;
    const double r = (best / 9 + 0.5) / 3.0;
    const double g = (best / 3 % 3 + 0.5) / 3.0;
    const double b = (best % 3 + 0.5) / 3.0;
    row.dominant_color = nearest_color_name(r, g, b);
  }
}

void write_trends_csv(const std::string& path, const TrendTable& table, const ClassMap& classes) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "year_month,class,count,share,dominant_color\n";
  char share[32];
  for (const auto& row : table.rows) {
    std::snprintf(share, sizeof(share), "%.6f", row.share);
    os << row.year_month << "," << classes.name_of(row.class_id) << "," << row.count << ","
       << share << "," << row.dominant_color << "\n";
  }
  if (!os) throw std::runtime_error("write failed for " + path);
}

std::string trends_json(const TrendTable& table, const ClassMap& classes) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json j;
    j["year_month"] = row.year_month;
    j["class"] = classes.name_of(row.class_id);
    j["count"] = row.count;
    j["share"] = row.share;
    j["dominant_color"] = row.dominant_color;
    j["color_histogram"] = row.color_histogram;
    rows.push_back(std::move(j));
  }
  nlohmann::json j;
  j["rows"] = std::move(rows);
  j["skipped_no_timestamp"] = table.skipped_no_timestamp;
  return j.dump(2);
}

}  // namespace cdssd
