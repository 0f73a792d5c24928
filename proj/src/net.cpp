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

#include "cdssd/net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cdssd/rng.hpp"

namespace cdssd {

namespace k = kernels;

void NetworkConfig::validate() const {
  if (meta_layers < 1) throw std::invalid_argument("config: meta_layers must be >= 1");
  if (static_cast<int>(channels.size()) != meta_layers) {
    throw std::invalid_argument("config: channels must list one entry per meta-layer");
  }
  for (int c : channels) {
    if (c < 1) throw std::invalid_argument("config: channel counts must be >= 1");
  }
  if (input_size < (1 << (meta_layers - 1))) {
    throw std::invalid_argument("config: input_size " + std::to_string(input_size) +
                                " too small for " + std::to_string(meta_layers) + " meta-layers");
  }
  if (num_classes < 1) throw std::invalid_argument("config: num_classes must be >= 1");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("config: dropout_rate must be in [0,1)");
  }
  if (heads_on_layers.empty()) throw std::invalid_argument("config: at least one head layer required");
  for (int l : heads_on_layers) {
    if (l < 1 || l > meta_layers) {
      throw std::invalid_argument("config: head layer " + std::to_string(l) + " out of range");
    }
  }
  if (box_pool_per_layer.size() != heads_on_layers.size() ||
      layer_scales.size() != heads_on_layers.size()) {
    throw std::invalid_argument("config: box_pool_per_layer and layer_scales must parallel heads_on_layers");
  }
  for (int bp : box_pool_per_layer) {
    if (bp < 1 || bp > 3) throw std::invalid_argument("config: box pool k must be in {1,2,3}");
  }
  for (double s : layer_scales) {
    if (s <= 0.0 || s > 1.0) throw std::invalid_argument("config: layer scales must be in (0,1]");
  }
  if (fused_channels < 1) throw std::invalid_argument("config: fused_channels must be >= 1");
  if (anchors_per_cell < 1) throw std::invalid_argument("config: anchors_per_cell must be >= 1");
}

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// He-uniform fill seeded by (seed, name) so parameter creation is
// order-independent and reproducible.
Tensor he_uniform(const std::vector<int>& shape, int fan_in, uint64_t seed, const std::string& name) {
  Tensor t(shape);
  const double limit = std::sqrt(6.0 / fan_in);
  Rng rng(mix64(seed, fnv1a(name)));
  for (auto& v : t.data) v = rng.uniform(-limit, limit);
  return t;
}

int in_channels(const NetworkConfig& cfg, int layer) {
  return layer == 1 ? 3 : cfg.channels[layer - 2];
}

int cat_channels(const NetworkConfig& cfg, int layer) {
  // enc pre-pool + enc post-pool + dec pre-up (all channels[layer-1]) +
  // dec post-up (channels of the next-shallower layer, or 3 for layer 1).
  return 3 * cfg.channels[layer - 1] + in_channels(cfg, layer);
}

void add_encoder_decoder_params(Network& net, uint64_t seed) {
  const auto& cfg = net.config;
  for (int i = 1; i <= cfg.meta_layers; ++i) {
    const std::string we = "enc" + std::to_string(i) + ".w";
    const std::string be = "enc" + std::to_string(i) + ".b";
    const int cin = in_channels(cfg, i);
    net.params.emplace(we, he_uniform({cfg.channels[i - 1], cin, 3, 3}, cin * 9, seed, we));
    net.params.emplace(be, Tensor({cfg.channels[i - 1]}));
    const std::string wd = "dec" + std::to_string(i) + ".w";
    const std::string bd = "dec" + std::to_string(i) + ".b";
    const int cdec = cfg.channels[i - 1];
    net.params.emplace(wd, he_uniform({cdec, cin, 2, 2}, cdec * 4, seed, wd));
    net.params.emplace(bd, Tensor({cin}));
  }
}

void add_head_params(Network& net, uint64_t seed) {
  const auto& cfg = net.config;
  const int head_ch = cfg.anchors_per_cell * (cfg.num_classes + 1 + 4);
  for (int l : cfg.heads_on_layers) {
    const std::string wf = "fuse" + std::to_string(l) + ".w";
    const std::string bf = "fuse" + std::to_string(l) + ".b";
    if (!net.params.count(wf)) {
      const int cc = cat_channels(cfg, l);
      net.params.emplace(wf, he_uniform({cfg.fused_channels, cc, 1, 1}, cc, seed, wf));
      net.params.emplace(bf, Tensor({cfg.fused_channels}));
    }
    const std::string wh = "head" + std::to_string(l) + ".w";
    const std::string bh = "head" + std::to_string(l) + ".b";
    if (!net.params.count(wh)) {
      net.params.emplace(wh, he_uniform({head_ch, cfg.fused_channels, 3, 3},
                                        cfg.fused_channels * 9, seed, wh));
      net.params.emplace(bh, Tensor({head_ch}));
    }
  }
}

}  // namespace

Network make_network(const NetworkConfig& config, NetMode mode, uint64_t seed) {
  config.validate();
  Network net;
  net.config = config;
  net.mode = mode;
  add_encoder_decoder_params(net, seed);
  if (mode == NetMode::kDetect) add_head_params(net, seed);
  return net;
}

void switch_mode(Network& net, NetMode mode, uint64_t seed) {
  net.mode = mode;
  if (mode == NetMode::kDetect) add_head_params(net, seed);
}

void load_params(Network& net, const std::map<std::string, Tensor>& loaded) {
  for (const auto& [name, tensor] : loaded) {
    auto it = net.params.find(name);
    if (it == net.params.end()) continue;
    if (it->second.shape != tensor.shape) {
      throw std::runtime_error("load_params: shape mismatch for " + name + ": have " +
                               shape_str(it->second.shape) + ", loaded " + shape_str(tensor.shape));
    }
    it->second = tensor;
  }
}

std::vector<FeatureMapSpec> head_layout(const NetworkConfig& config) {
  config.validate();
  std::vector<FeatureMapSpec> layout;
  for (size_t i = 0; i < config.heads_on_layers.size(); ++i) {
    const int l = config.heads_on_layers[i];
    FeatureMapSpec spec;
    spec.layer_index = l;
    spec.m = spec.n = config.resolution_before(l);
    spec.K = config.anchors_per_cell;
    spec.scale = config.layer_scales[i];
    spec.box_pool_k = config.box_pool_per_layer[i];
    layout.push_back(spec);
  }
  return layout;
}

int total_anchor_rows(const NetworkConfig& config) {
  int total = 0;
  for (const auto& spec : head_layout(config)) total += spec.anchor_count();
  return total;
}

Tensor box_pool(const Tensor& map, int kk) {
  if (kk < 1 || kk > 3) throw std::invalid_argument("box_pool: k must be in {1,2,3}");
  return k::maxpool(map, kk).out;
}

Tensor fuse_meta_layer(const Tensor& enc_pre_pool, const Tensor& enc_post_pool,
                       const Tensor& dec_pre_up, const Tensor& dec_post_up,
                       const Tensor& proj_w, const Tensor& proj_b,
                       Tensor* cat, Tensor* pre_relu) {
  const int h = enc_pre_pool.dim(1), w = enc_pre_pool.dim(2);
  const int hp = (h + 1) / 2, wp = (w + 1) / 2;
  if (dec_post_up.dim(1) != h || dec_post_up.dim(2) != w ||
      enc_post_pool.dim(1) != hp || enc_post_pool.dim(2) != wp ||
      dec_pre_up.dim(1) != hp || dec_pre_up.dim(2) != wp) {
    throw std::invalid_argument("fuse_meta_layer: maps do not belong to the same meta-layer");
  }
  const Tensor up_enc = k::resize_nearest(enc_post_pool, h, w);
  const Tensor up_dec = k::resize_nearest(dec_pre_up, h, w);
  Tensor catted = k::concat_channels({&enc_pre_pool, &up_enc, &up_dec, &dec_post_up});
  Tensor pre = k::conv2d(catted, proj_w, proj_b, 1, 0);
  Tensor fused = k::relu(pre);
  if (cat) *cat = std::move(catted);
  if (pre_relu) *pre_relu = std::move(pre);
  return fused;
}

namespace {

const Tensor& param(const Network& net, const std::string& name) {
  auto it = net.params.find(name);
  if (it == net.params.end()) throw std::runtime_error("network parameter missing: " + name);
  return it->second;
}

void check_image(const NetworkConfig& cfg, const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3 || image.dim(1) != cfg.input_size ||
      image.dim(2) != cfg.input_size) {
    throw std::invalid_argument("network input must be [3," + std::to_string(cfg.input_size) + "," +
                                std::to_string(cfg.input_size) + "], got " + shape_str(image.shape));
  }
}

void run_encoder(const Network& net, const Tensor& image, uint64_t dropout_key, ForwardTrace& tr) {
  const auto& cfg = net.config;
  const bool use_dropout = net.mode == NetMode::kPretrain && cfg.dropout_rate > 0.0;
  tr.input = image;
  tr.dropout_key = dropout_key;
  tr.enc_conv.reserve(cfg.meta_layers);
  tr.enc_pre.reserve(cfg.meta_layers);
  tr.enc_pool.reserve(cfg.meta_layers);
  const Tensor* x = &tr.input;
  for (int i = 1; i <= cfg.meta_layers; ++i) {
    const std::string tag = std::to_string(i);
    Tensor conv = k::conv2d(*x, param(net, "enc" + tag + ".w"), param(net, "enc" + tag + ".b"), 1, 1);
    Tensor pre = k::relu(conv);
    if (use_dropout) pre = k::dropout(pre, cfg.dropout_rate, mix64(dropout_key, i));
    tr.enc_conv.push_back(std::move(conv));
    tr.enc_pre.push_back(std::move(pre));
    tr.enc_pool.push_back(k::maxpool(tr.enc_pre.back(), 2));
    x = &tr.enc_pool.back().out;
  }
}

// Top-left spatial crop, and its adjoint (zero padding), for odd encoder
// sizes where the stride-2 upsample overshoots by one row/col.
Tensor crop_spatial(const Tensor& x, int h, int w) {
  if (x.dim(1) == h && x.dim(2) == w) return x;
  Tensor out({x.dim(0), h, w});
  for (int c = 0; c < x.dim(0); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int xx = 0; xx < w; ++xx) out.at(c, y, xx) = x.at(c, y, xx);
    }
  }
  return out;
}

Tensor pad_spatial(const Tensor& g, int h, int w) {
  if (g.dim(1) == h && g.dim(2) == w) return g;
  Tensor out({g.dim(0), h, w});
  for (int c = 0; c < g.dim(0); ++c) {
    for (int y = 0; y < g.dim(1); ++y) {
      for (int xx = 0; xx < g.dim(2); ++xx) out.at(c, y, xx) = g.at(c, y, xx);
    }
  }
  return out;
}

// Decoder from the bottleneck down to `lowest` (1 reconstructs the image).
void run_decoder(const Network& net, ForwardTrace& tr, int lowest) {
  const auto& cfg = net.config;
  tr.dec_lowest_layer = lowest;
  tr.dec_in.assign(cfg.meta_layers, Tensor());
  tr.dec_tconv.assign(cfg.meta_layers, Tensor());
  tr.dec_out.assign(cfg.meta_layers, Tensor());
  const Tensor* d = &tr.enc_pool.back().out;
  for (int i = cfg.meta_layers; i >= lowest; --i) {
    const std::string tag = std::to_string(i);
    const int target = cfg.resolution_before(i);
    tr.dec_in[i - 1] = *d;
    Tensor t = k::transposed_conv2d(tr.dec_in[i - 1], param(net, "dec" + tag + ".w"),
                                    param(net, "dec" + tag + ".b"), 2);
    t = crop_spatial(t, target, target);
    tr.dec_out[i - 1] = i > 1 ? k::relu(t) : t;  // layer 1 emits the linear reconstruction
    tr.dec_tconv[i - 1] = std::move(t);
    d = &tr.dec_out[i - 1];
  }
}

struct HeadShape {
  int rows = 0;  // pooled rows * pooled cols * K
  int ph = 0, pw = 0;
};

HeadShape head_shape(const NetworkConfig& cfg, size_t head_idx) {
  const int l = cfg.heads_on_layers[head_idx];
  const int r = cfg.resolution_before(l);
  const int bp = cfg.box_pool_per_layer[head_idx];
  HeadShape hs;
  hs.ph = (r + bp - 1) / bp;
  hs.pw = hs.ph;
  hs.rows = hs.ph * hs.pw * cfg.anchors_per_cell;
  return hs;
}

}  // namespace

Tensor forward_autoencoder(const Network& net, const Tensor& image, uint64_t dropout_key,
                           ForwardTrace* trace) {
  if (net.mode != NetMode::kPretrain) {
    throw std::runtime_error("forward_autoencoder requires pretrain mode");
  }
  check_image(net.config, image);
  ForwardTrace tr;
  run_encoder(net, image, dropout_key, tr);
  run_decoder(net, tr, 1);
  tr.recon = tr.dec_out[0];
  Tensor recon = tr.recon;
  if (trace) *trace = std::move(tr);
  return recon;
}

HeadOutput forward_detect(const Network& net, const Tensor& image, ForwardTrace* trace) {
  if (net.mode != NetMode::kDetect) throw std::runtime_error("forward_detect requires detect mode");
  const auto& cfg = net.config;
  check_image(cfg, image);

  ForwardTrace tr;
  run_encoder(net, image, 0, tr);
  const int lowest = *std::min_element(cfg.heads_on_layers.begin(), cfg.heads_on_layers.end());
  run_decoder(net, tr, lowest);

  const int nc1 = cfg.num_classes + 1;
  const int block = nc1 + 4;
  HeadOutput out;
  out.logits = Tensor({total_anchor_rows(cfg), nc1});
  out.offsets = Tensor({total_anchor_rows(cfg), 4});

  int row0 = 0;
  for (size_t hi = 0; hi < cfg.heads_on_layers.size(); ++hi) {
    const int l = cfg.heads_on_layers[hi];
    const std::string tag = std::to_string(l);
    ForwardTrace::HeadTrace ht;
    ht.layer = l;
    ht.fused = fuse_meta_layer(tr.enc_pre[l - 1], tr.enc_pool[l - 1].out, tr.dec_in[l - 1],
                               tr.dec_out[l - 1], param(net, "fuse" + tag + ".w"),
                               param(net, "fuse" + tag + ".b"), &ht.cat, &ht.fuse_pre);
    ht.pooled = k::maxpool(ht.fused, cfg.box_pool_per_layer[hi]);
    ht.head_out = k::conv2d(ht.pooled.out, param(net, "head" + tag + ".w"),
                            param(net, "head" + tag + ".b"), 1, 1);

    const HeadShape hs = head_shape(cfg, hi);
    // Cell-major rows: (row, col) then ratio index; channel layout is one
    // (C+1+4) block per ratio.
    for (int y = 0; y < hs.ph; ++y) {
      for (int x = 0; x < hs.pw; ++x) {
        for (int kk = 0; kk < cfg.anchors_per_cell; ++kk) {
          const int row = row0 + (y * hs.pw + x) * cfg.anchors_per_cell + kk;
          for (int j = 0; j < nc1; ++j) {
            out.logits.at(row, j) = ht.head_out.at(kk * block + j, y, x);
          }
          for (int j = 0; j < 4; ++j) {
            out.offsets.at(row, j) = ht.head_out.at(kk * block + nc1 + j, y, x);
          }
        }
      }
    }
    row0 += hs.rows;
    tr.heads.push_back(std::move(ht));
  }
  if (trace) *trace = std::move(tr);
  return out;
}

namespace {

Tensor& grad_slot(GradMap& grads, const std::string& name, const std::vector<int>& shape) {
  auto it = grads.find(name);
  if (it == grads.end()) it = grads.emplace(name, Tensor(shape)).first;
  return it->second;
}

void add_into(Tensor& dst, const Tensor& src) {
  for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

// Shared by both backward passes: walks the encoder in reverse given the
// gradient of each post-pool output (gx) and optional extra gradients on the
// pre-pool maps (from fusion branches).
void encoder_backward(const Network& net, const ForwardTrace& tr, std::vector<Tensor>& gx,
                      std::vector<Tensor>& gpre_extra, GradMap& grads) {
  const auto& cfg = net.config;
  const bool used_dropout = net.mode == NetMode::kPretrain && cfg.dropout_rate > 0.0;
  for (int i = cfg.meta_layers; i >= 1; --i) {
    const std::string tag = std::to_string(i);
    Tensor gpre = k::maxpool_backward(tr.enc_pool[i - 1].argmax, tr.enc_pre[i - 1].shape, gx[i - 1]);
    if (gpre_extra[i - 1].size() > 0) add_into(gpre, gpre_extra[i - 1]);
    if (used_dropout) gpre = k::dropout_backward(gpre, cfg.dropout_rate, mix64(tr.dropout_key, i));
    Tensor grelu = k::relu_backward(tr.enc_conv[i - 1], gpre);
    const Tensor& w = param(net, "enc" + tag + ".w");
    const Tensor& input = i == 1 ? tr.input : tr.enc_pool[i - 2].out;
    Tensor dx;
    k::conv2d_backward(input, w, 1, 1, grelu, i > 1 ? &dx : nullptr,
                       &grad_slot(grads, "enc" + tag + ".w", w.shape),
                       &grad_slot(grads, "enc" + tag + ".b", {w.dim(0)}));
    if (i > 1) add_into(gx[i - 2], dx);
  }
}

// Decoder backward from `lowest` up to the bottleneck. gdec_out[i-1] must
// hold the gradient of dec_out[i-1] accumulated so far; returns the gradient
// flowing into the bottleneck (enc_pool.back()).
Tensor decoder_backward(const Network& net, const ForwardTrace& tr, std::vector<Tensor>& gdec_out,
                        GradMap& grads) {
  const auto& cfg = net.config;
  Tensor bottleneck_grad;
  for (int i = tr.dec_lowest_layer; i <= cfg.meta_layers; ++i) {
    const std::string tag = std::to_string(i);
    Tensor dt = i > 1 ? k::relu_backward(tr.dec_tconv[i - 1], gdec_out[i - 1]) : gdec_out[i - 1];
    const int full = (tr.dec_in[i - 1].dim(1) - 1) * 2 + 2;  // tconv size before crop
    dt = pad_spatial(dt, full, full);
    const Tensor& w = param(net, "dec" + tag + ".w");
    Tensor dx;
    k::transposed_conv2d_backward(tr.dec_in[i - 1], w, 2, dt, &dx,
                                  &grad_slot(grads, "dec" + tag + ".w", w.shape),
                                  &grad_slot(grads, "dec" + tag + ".b", {w.dim(1)}));
    if (i == cfg.meta_layers) {
      bottleneck_grad = std::move(dx);
    } else {
      add_into(gdec_out[i], dx);  // dec_in[i] aliases dec_out[i+1]
    }
  }
  return bottleneck_grad;
}

}  // namespace

double autoencoder_backward(const Network& net, const ForwardTrace& trace, GradMap& grads) {
  const auto& cfg = net.config;
  const Tensor& recon = trace.recon;
  const int64_t n = recon.size();
  double loss = 0.0;
  Tensor drecon(recon.shape);
  for (int64_t i = 0; i < n; ++i) {
    const double d = recon.data[i] - trace.input.data[i];
    loss += d * d;
    drecon.data[i] = 2.0 * d / n;
  }
  loss /= n;

  std::vector<Tensor> gdec_out(cfg.meta_layers);
  for (int i = 0; i < cfg.meta_layers; ++i) gdec_out[i] = Tensor(trace.dec_out[i].shape);
  gdec_out[0] = std::move(drecon);
  Tensor gbottleneck = decoder_backward(net, trace, gdec_out, grads);

  std::vector<Tensor> gx(cfg.meta_layers);
  std::vector<Tensor> gpre_extra(cfg.meta_layers);
  for (int i = 0; i < cfg.meta_layers; ++i) gx[i] = Tensor(trace.enc_pool[i].out.shape);
  gx[cfg.meta_layers - 1] = std::move(gbottleneck);
  encoder_backward(net, trace, gx, gpre_extra, grads);
  return loss;
}

void detect_backward(const Network& net, const ForwardTrace& trace,
                     const Tensor& dlogits, const Tensor& doffsets, GradMap& grads) {
  const auto& cfg = net.config;
  const int nc1 = cfg.num_classes + 1;
  const int block = nc1 + 4;

  std::vector<Tensor> gx(cfg.meta_layers);
  std::vector<Tensor> gpre_extra(cfg.meta_layers);
  std::vector<Tensor> gdec_out(cfg.meta_layers);
  for (int i = 0; i < cfg.meta_layers; ++i) {
    gx[i] = Tensor(trace.enc_pool[i].out.shape);
    if (trace.dec_out[i].size() > 0) gdec_out[i] = Tensor(trace.dec_out[i].shape);
  }

  int row0 = 0;
  for (size_t hi = 0; hi < trace.heads.size(); ++hi) {
    const auto& ht = trace.heads[hi];
    const std::string tag = std::to_string(ht.layer);
    const HeadShape hs = head_shape(cfg, hi);

    Tensor dhead(ht.head_out.shape);
    for (int y = 0; y < hs.ph; ++y) {
      for (int x = 0; x < hs.pw; ++x) {
        for (int kk = 0; kk < cfg.anchors_per_cell; ++kk) {
          const int row = row0 + (y * hs.pw + x) * cfg.anchors_per_cell + kk;
          for (int j = 0; j < nc1; ++j) dhead.at(kk * block + j, y, x) = dlogits.at(row, j);
          for (int j = 0; j < 4; ++j) dhead.at(kk * block + nc1 + j, y, x) = doffsets.at(row, j);
        }
      }
    }
    row0 += hs.rows;

    const Tensor& hw = param(net, "head" + tag + ".w");
    Tensor dpooled;
    k::conv2d_backward(ht.pooled.out, hw, 1, 1, dhead, &dpooled,
                       &grad_slot(grads, "head" + tag + ".w", hw.shape),
                       &grad_slot(grads, "head" + tag + ".b", {hw.dim(0)}));
    Tensor dfused = k::maxpool_backward(ht.pooled.argmax, ht.fused.shape, dpooled);
    Tensor dfuse_pre = k::relu_backward(ht.fuse_pre, dfused);

    const Tensor& fw = param(net, "fuse" + tag + ".w");
    Tensor dcat;
    k::conv2d_backward(ht.cat, fw, 1, 0, dfuse_pre, &dcat,
                       &grad_slot(grads, "fuse" + tag + ".w", fw.shape),
                       &grad_slot(grads, "fuse" + tag + ".b", {fw.dim(0)}));

    const int l = ht.layer;
    const int c_layer = cfg.channels[l - 1];
    auto parts = k::split_channels(dcat, {c_layer, c_layer, c_layer, in_channels(cfg, l)});
    const int hp = trace.enc_pool[l - 1].out.dim(1), wp = trace.enc_pool[l - 1].out.dim(2);
    if (gpre_extra[l - 1].size() == 0) gpre_extra[l - 1] = Tensor(trace.enc_pre[l - 1].shape);
    add_into(gpre_extra[l - 1], parts[0]);
    add_into(gx[l - 1], k::resize_nearest_backward(parts[1], hp, wp));
    // dec_in[l-1] aliases dec_out[l] except at the bottleneck where it is the
    // encoder output itself.
    Tensor ddec_in = k::resize_nearest_backward(parts[2], hp, wp);
    if (l == cfg.meta_layers) {
      add_into(gx[l - 1], ddec_in);
    } else {
      add_into(gdec_out[l], ddec_in);
    }
    add_into(gdec_out[l - 1], parts[3]);
  }

  Tensor gbottleneck = decoder_backward(net, trace, gdec_out, grads);
  add_into(gx[cfg.meta_layers - 1], gbottleneck);
  encoder_backward(net, trace, gx, gpre_extra, grads);
}

}  // namespace cdssd
