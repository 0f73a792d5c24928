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

#include "cdssd/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace cdssd {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw std::runtime_error("image " + path + ": " + why);
}

// Skips PNM whitespace and '#' comments, then reads one unsigned integer.
int pnm_int(std::istream& is, const std::string& path) {
  int c = is.get();
  while (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') {
    if (c == '#') {
      while (c != '\n' && c != EOF) c = is.get();
    }
    c = is.get();
  }
  int value = 0;
  bool any = false;
  while (c >= '0' && c <= '9') {
    value = value * 10 + (c - '0');
    any = true;
    c = is.get();
  }
  if (!any) fail(path, "malformed PNM header");
  return value;
}

Tensor read_pnm(std::ifstream& is, const std::string& path, bool color) {
  const int w = pnm_int(is, path);
  const int h = pnm_int(is, path);
  const int maxval = pnm_int(is, path);
  if (w < 1 || h < 1) fail(path, "bad dimensions");
  if (maxval != 255) fail(path, "only maxval 255 supported");
  const int ch = color ? 3 : 1;
  std::vector<unsigned char> raw(static_cast<size_t>(w) * h * ch);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!is) fail(path, "truncated pixel data");
  Tensor t({3, h, w});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const unsigned char v = raw[(static_cast<size_t>(y) * w + x) * ch + (color ? c : 0)];
        t.at(c, y, x) = v / 255.0;
      }
    }
  }
  return t;
}

Tensor read_png(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) fail(path, "cannot open");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    std::fclose(fp);
    fail(path, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    fail(path, "corrupt PNG");
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  std::vector<unsigned char> raw(static_cast<size_t>(w) * h * 3);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = raw.data() + static_cast<size_t>(y) * w * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  Tensor t({3, h, w});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) t.at(c, y, x) = raw[(static_cast<size_t>(y) * w + x) * 3 + c] / 255.0;
    }
  }
  return t;
}

void write_png(const std::string& path, const std::vector<unsigned char>& raw, int w, int h) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) fail(path, "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    std::fclose(fp);
    fail(path, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    fail(path, "PNG write failed");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) {
    rows[y] = const_cast<png_bytep>(raw.data() + static_cast<size_t>(y) * w * 3);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace

Tensor read_image(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(path, "cannot open");
  unsigned char magic[2] = {0, 0};
  is.read(reinterpret_cast<char*>(magic), 2);
  if (!is) fail(path, "empty file");
  if (magic[0] == 'P' && magic[1] == '6') return read_pnm(is, path, true);
  if (magic[0] == 'P' && magic[1] == '5') return read_pnm(is, path, false);
  if (magic[0] == 0x89 && magic[1] == 'P') {
    is.close();
    return read_png(path);
  }
  fail(path, "unsupported format (expected PPM, PGM or PNG)");
}

void write_image(const std::string& path, const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw std::invalid_argument("write_image: tensor must be [3,H,W]");
  }
  const int h = image.dim(1), w = image.dim(2);
  std::vector<unsigned char> raw(static_cast<size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(image.at(c, y, x), 0.0, 1.0);
        raw[(static_cast<size_t>(y) * w + x) * 3 + c] =
            static_cast<unsigned char>(std::lround(v * 255.0));
      }
    }
  }
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".png") {
    write_png(path, raw, w, h);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(path, "cannot open for writing");
  os << "P6\n" << w << " " << h << "\n255\n";
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!os) fail(path, "write failed");
}

void draw_box(Tensor& image, const Box& box, double r, double g, double b) {
  const int h = image.dim(1), w = image.dim(2);
  const int x0 = std::clamp(static_cast<int>(box.x0() * w), 0, w - 1);
  const int x1 = std::clamp(static_cast<int>(box.x1() * w), 0, w - 1);
  const int y0 = std::clamp(static_cast<int>(box.y0() * h), 0, h - 1);
  const int y1 = std::clamp(static_cast<int>(box.y1() * h), 0, h - 1);
  auto paint = [&](int y, int x) {
    image.at(0, y, x) = r;
    image.at(1, y, x) = g;
    image.at(2, y, x) = b;
  };
  for (int t = 0; t < 2; ++t) {
    for (int x = x0; x <= x1; ++x) {
      paint(std::min(y0 + t, h - 1), x);
      paint(std::max(y1 - t, 0), x);
    }
    for (int y = y0; y <= y1; ++y) {
      paint(y, std::min(x0 + t, w - 1));
      paint(y, std::max(x1 - t, 0));
    }
  }
}

}  // namespace cdssd
