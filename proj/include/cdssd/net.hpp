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
#include <map>
#include <string>
#include <vector>

#include "cdssd/anchors.hpp"
#include "cdssd/kernels.hpp"
#include "cdssd/tensor.hpp"

namespace cdssd {

enum class NetMode { kPretrain, kDetect };

/// Network architecture description. One meta-layer is conv3x3 + relu
/// (+ dropout in pretrain mode) + maxpool2 on the encoder side and a stride-2
/// transposed conv on the decoder side. Prediction heads sit on the fused
/// maps of the listed meta-layers.
struct NetworkConfig {
  int input_size = 96;
  int meta_layers = 4;
  std::vector<int> channels = {8, 16, 32, 64};
  int num_classes = 3;
  double dropout_rate = 0.1;
  std::vector<int> heads_on_layers = {2, 3, 4};
  std::vector<int> box_pool_per_layer = {2, 2, 1};     // parallel to heads_on_layers
  std::vector<double> layer_scales = {0.20, 0.35, 0.55};  // parallel to heads_on_layers
  int fused_channels = 32;
  int anchors_per_cell = 4;  // K; must equal the aspect-ratio bin count

  void validate() const;  // throws std::invalid_argument on inconsistency
  /// Feature-map resolution entering meta-layer i (1-based), i.e. after i-1
  /// ceil-mode pools. Odd sizes are handled by cropping the decoder's
  /// upsampled maps back to the matching encoder resolution.
  int resolution_before(int layer) const {
    int r = input_size;
    for (int i = 1; i < layer; ++i) r = (r + 1) / 2;
    return r;
  }
};

struct Network {
  NetworkConfig config;
  NetMode mode = NetMode::kPretrain;
  std::map<std::string, Tensor> params;  // enc{i}.w/.b, dec{i}.w/.b, fuse{l}.w/.b, head{l}.w/.b
};

/// Builds a network with He-uniform conv weights and zero biases, drawn in a
/// fixed parameter order from `seed`. Pretrain mode owns only encoder and
/// decoder parameters; detect mode adds fusion projections and heads.
Network make_network(const NetworkConfig& config, NetMode mode, uint64_t seed);

/// Switches mode in place. Encoder/decoder tensors are left untouched
/// (bit-exact); fusion and head parameters are created from `seed` only when
/// missing. Dropout is active only in pretrain mode.
void switch_mode(Network& net, NetMode mode, uint64_t seed);

/// Overwrites parameters whose names appear in `loaded`; leaves the rest
/// (e.g. freshly initialized heads) alone. Shape mismatches throw.
void load_params(Network& net, const std::map<std::string, Tensor>& loaded);

/// Prediction-layer geometry implied by the config, in heads_on_layers order.
std::vector<FeatureMapSpec> head_layout(const NetworkConfig& config);
/// Total anchor rows A = sum over layers of pooled cells * K.
int total_anchor_rows(const NetworkConfig& config);

/// Combines the four feature maps of one meta-layer: encoder pre-pool,
/// encoder post-pool, decoder pre-upsample, decoder post-upsample. The two
/// half-resolution maps are nearest-neighbor upsampled to the pre-pool
/// resolution, all four are concatenated along channels and projected through
/// a learned 1x1 conv + relu. Maps from different meta-layers (inconsistent
/// resolutions) throw. cat/pre_relu expose intermediates for the backward pass.
Tensor fuse_meta_layer(const Tensor& enc_pre_pool, const Tensor& enc_post_pool,
                       const Tensor& dec_pre_up, const Tensor& dec_post_up,
                       const Tensor& proj_w, const Tensor& proj_b,
                       Tensor* cat = nullptr, Tensor* pre_relu = nullptr);

/// Stride-k max pooling with window k; k = 1 is the identity.
Tensor box_pool(const Tensor& map, int k);

/// Saved activations of one forward pass, consumed by the backward passes.
struct ForwardTrace {
  Tensor input;
  uint64_t dropout_key = 0;
  std::vector<Tensor> enc_conv;            // pre-relu, per meta-layer
  std::vector<Tensor> enc_pre;             // relu (+ dropout) output, pre-pool
  std::vector<kernels::PoolOut> enc_pool;  // post-pool + argmax
  std::vector<Tensor> dec_in;              // [meta_layers] entries, index layer-1
  std::vector<Tensor> dec_tconv;           // pre-relu
  std::vector<Tensor> dec_out;
  int dec_lowest_layer = 1;                // detect mode stops at min(heads_on_layers)
  struct HeadTrace {
    int layer = 0;
    Tensor cat;
    Tensor fuse_pre;
    Tensor fused;
    kernels::PoolOut pooled;
    Tensor head_out;
  };
  std::vector<HeadTrace> heads;
  Tensor recon;
};

/// Autoencoder pass (pretrain mode): returns the reconstruction, same shape
/// as the input. dropout_key seeds the per-layer dropout masks for this step.
Tensor forward_autoencoder(const Network& net, const Tensor& image, uint64_t dropout_key,
                           ForwardTrace* trace = nullptr);

struct HeadOutput {
  Tensor logits;   // [A, C+1]
  Tensor offsets;  // [A, 4]
};

/// Detection pass (detect mode): per-anchor class logits and box offsets,
/// rows ordered layer-major, then row, col, ratio — matching AnchorSet order.
HeadOutput forward_detect(const Network& net, const Tensor& image, ForwardTrace* trace = nullptr);

using GradMap = std::map<std::string, Tensor>;

/// Mean-squared-error reconstruction loss and its parameter gradients,
/// accumulated into `grads`. Returns the loss.
double autoencoder_backward(const Network& net, const ForwardTrace& trace, GradMap& grads);

/// Backpropagates detection-head gradients through fusion, decoder and
/// encoder, accumulating parameter gradients into `grads`.
void detect_backward(const Network& net, const ForwardTrace& trace,
                     const Tensor& dlogits, const Tensor& doffsets, GradMap& grads);

}  // namespace cdssd
