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

#include "cdssd/tensor.hpp"

// Serial reference kernels. Written as directly as possible from the operator
// definitions (naive nested loops, scatter formulations) and kept independent
// of the OpenMP implementations in cdssd::kernels. Tests compare the two;
// kernel_bench times them against each other.
namespace cdssd::ref {

/// Quadruple-loop cross-correlation.
Tensor conv2d(const Tensor& x, const Tensor& k, const Tensor& bias, int stride, int pad);

/// Defined as the gradient of conv2d with respect to its input: every input
/// cell scatters through the kernel onto the output.
Tensor transposed_conv2d(const Tensor& x, const Tensor& k, const Tensor& bias, int stride);

/// Window-scan max pooling, ceil-mode edges.
Tensor maxpool(const Tensor& x, int k);

Tensor softmax_rows(const Tensor& x);

Tensor relu(const Tensor& x);

}  // namespace cdssd::ref
