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

#include <cstdint>
#include <vector>

#include "cdssd/tensor.hpp"

// OpenMP-parallel network kernels. Every parallel loop writes disjoint output
// elements and accumulates with serial inner sums, so results are bit-identical
// for any thread count. Serial twins used as test oracles and benchmark
// baselines live in cdssd::ref (ref_kernels.hpp).
namespace cdssd::kernels {

/// Cross-correlation. x: [Cin,H,W], k: [Cout,Cin,kh,kw], bias: [Cout] or empty.
/// Output [Cout, (H+2p-kh)/s+1, (W+2p-kw)/s+1].
Tensor conv2d(const Tensor& x, const Tensor& k, const Tensor& bias, int stride, int pad);

/// Gradients of conv2d. Any of dx/dk/dbias may be null. dk and dbias are
/// accumulated into (caller zeroes or reuses across a batch).
void conv2d_backward(const Tensor& x, const Tensor& k, int stride, int pad,
                     const Tensor& dout, Tensor* dx, Tensor* dk, Tensor* dbias);

/// Fractionally strided convolution (the adjoint of conv2d with pad 0).
/// x: [Cin,H,W], k: [Cin,Cout,kh,kw]. Output [Cout,(H-1)s+kh,(W-1)s+kw].
Tensor transposed_conv2d(const Tensor& x, const Tensor& k, const Tensor& bias, int stride);

void transposed_conv2d_backward(const Tensor& x, const Tensor& k, int stride,
                                const Tensor& dout, Tensor* dx, Tensor* dk, Tensor* dbias);

struct PoolOut {
  Tensor out;
  std::vector<int32_t> argmax;  // flat index into the input, per output element
};

/// Max pooling, window k, stride k, ceil-mode edges (partial windows allowed).
PoolOut maxpool(const Tensor& x, int k);

Tensor maxpool_backward(const std::vector<int32_t>& argmax, const std::vector<int>& in_shape,
                        const Tensor& dout);

Tensor relu(const Tensor& x);
/// dx = dout where pre > 0. `pre` is the pre-activation input.
Tensor relu_backward(const Tensor& pre, const Tensor& dout);

/// Row-wise softmax of an [N,C] tensor; numerically stabilized.
Tensor softmax_rows(const Tensor& x);

/// Zeroes each element with probability rate and scales survivors by
/// 1/(1-rate). The mask is a pure function of (key, element index), so the
/// backward pass recomputes it instead of storing it. rate in [0,1).
Tensor dropout(const Tensor& x, double rate, uint64_t key);
Tensor dropout_backward(const Tensor& dout, double rate, uint64_t key);

/// Nearest-neighbor resize to (H2,W2); source index floor(i*H/H2).
Tensor resize_nearest(const Tensor& x, int h2, int w2);
Tensor resize_nearest_backward(const Tensor& dout, int h, int w);

Tensor concat_channels(const std::vector<const Tensor*>& parts);
/// Splits dout back into per-part channel gradients matching `channels`.
std::vector<Tensor> split_channels(const Tensor& dout, const std::vector<int>& channels);

}  // namespace cdssd::kernels
