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

#include <map>
#include <string>

#include "cdssd/tensor.hpp"

namespace cdssd {

// Weight checkpoint container. Layout, all little-endian:
//   magic "CDSSD1", u32 tensor count, then per tensor:
//   u32 name length, UTF-8 name, u32 rank, u32 dims[rank], f32 data.
// Values are stored as float32; loading promotes back to double.

void save_checkpoint(const std::string& path, const std::map<std::string, Tensor>& tensors);

std::map<std::string, Tensor> load_checkpoint(const std::string& path);

}  // namespace cdssd
