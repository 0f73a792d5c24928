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

#include "cdssd/box.hpp"
#include "cdssd/tensor.hpp"

namespace cdssd {

/// Reads a PPM (P6), PGM (P5) or PNG image into a [3,H,W] tensor with values
/// k/255. Grayscale is replicated to three channels; PNG alpha is dropped.
/// Unsupported or corrupt files raise an error naming the path.
Tensor read_image(const std::string& path);

/// Writes a [3,H,W] tensor with values in [0,1] as binary PPM or, when the
/// path ends in .png, as 8-bit RGB PNG. Both are lossless for 8-bit data, so
/// write followed by read is exact for tensors on the k/255 grid.
void write_image(const std::string& path, const Tensor& image);

/// Burns a rectangle into the pixels (2 px line width), for annotated output.
void draw_box(Tensor& image, const Box& box, double r, double g, double b);

}  // namespace cdssd
