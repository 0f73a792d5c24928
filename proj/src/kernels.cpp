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

#include "cdssd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cdssd/rng.hpp"

namespace cdssd::kernels {

namespace {

void check_conv_args(const Tensor& x, const Tensor& k, const Tensor& bias, int stride, int pad,
                     int cin_axis) {
  if (x.rank() != 3) throw std::invalid_argument("conv2d: input must be [C,H,W], got " + shape_str(x.shape));
  if (k.rank() != 4) throw std::invalid_argument("conv2d: kernel must be rank 4, got " + shape_str(k.shape));
  if (k.dim(cin_axis) != x.dim(0)) {
    throw std::invalid_argument("conv2d: kernel expects " + std::to_string(k.dim(cin_axis)) +
                                " input channels, input has " + std::to_string(x.dim(0)));
  }
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
  if (pad < 0) throw std::invalid_argument("conv2d: pad must be >= 0");
  if (k.dim(2) < 1 || k.dim(3) < 1) throw std::invalid_argument("conv2d: kernel size must be >= 1");
  if (x.dim(1) + 2 * pad < k.dim(2) || x.dim(2) + 2 * pad < k.dim(3)) {
    throw std::invalid_argument("conv2d: input " + shape_str(x.shape) + " too small for kernel " +
                                shape_str(k.shape) + " with pad " + std::to_string(pad));
  }
  if (!bias.data.empty() && (bias.rank() != 1 || bias.dim(0) != k.dim(cin_axis == 1 ? 0 : 1))) {
    throw std::invalid_argument("conv2d: bias shape mismatch");
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& k, const Tensor& bias, int stride, int pad) {
  check_conv_args(x, k, bias, stride, pad, 1);
  const int cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int cout = k.dim(0), kh = k.dim(2), kw = k.dim(3);
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (w + 2 * pad - kw) / stride + 1;
  Tensor out({cout, oh, ow});

#pragma omp parallel for schedule(static)
  for (int co = 0; co < cout; ++co) {
    double* oc = out.data.data() + static_cast<size_t>(co) * oh * ow;
    const double b = bias.data.empty() ? 0.0 : bias.data[co];
    for (int i = 0; i < oh * ow; ++i) oc[i] = b;
    for (int ci = 0; ci < cin; ++ci) {
      const double* xc = x.data.data() + static_cast<size_t>(ci) * h * w;
      const double* kc = k.data.data() + (static_cast<size_t>(co) * cin + ci) * kh * kw;
      for (int u = 0; u < kh; ++u) {
        for (int v = 0; v < kw; ++v) {
          const double kv = kc[u * kw + v];
          if (kv == 0.0) continue;
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride - pad + u;
            if (iy < 0 || iy >= h) continue;
            const double* xrow = xc + static_cast<size_t>(iy) * w;
            double* orow = oc + static_cast<size_t>(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride - pad + v;
              if (ix < 0 || ix >= w) continue;
              orow[ox] += kv * xrow[ix];
            }
          }
        }
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor& x, const Tensor& k, int stride, int pad,
                     const Tensor& dout, Tensor* dx, Tensor* dk, Tensor* dbias) {
  const int cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int cout = k.dim(0), kh = k.dim(2), kw = k.dim(3);
  const int oh = dout.dim(1), ow = dout.dim(2);

  if (dx) {
    if (dx->shape != x.shape) *dx = Tensor(x.shape);
#pragma omp parallel for schedule(static)
    for (int ci = 0; ci < cin; ++ci) {
      double* dc = dx->data.data() + static_cast<size_t>(ci) * h * w;
      std::fill(dc, dc + static_cast<size_t>(h) * w, 0.0);
      for (int co = 0; co < cout; ++co) {
        const double* gc = dout.data.data() + static_cast<size_t>(co) * oh * ow;
        const double* kc = k.data.data() + (static_cast<size_t>(co) * cin + ci) * kh * kw;
        for (int u = 0; u < kh; ++u) {
          for (int v = 0; v < kw; ++v) {
            const double kv = kc[u * kw + v];
            if (kv == 0.0) continue;
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * stride - pad + u;
              if (iy < 0 || iy >= h) continue;
              double* drow = dc + static_cast<size_t>(iy) * w;
              const double* grow = gc + static_cast<size_t>(oy) * ow;
              for (int ox = 0; ox < ow; ++ox) {
                const int ix = ox * stride - pad + v;
                if (ix < 0 || ix >= w) continue;
                drow[ix] += kv * grow[ox];
              }
            }
          }
        }
      }
    }
  }

  if (dk) {
    if (dk->shape != k.shape) {
      *dk = Tensor(k.shape);
    }
#pragma omp parallel for schedule(static) collapse(2)
    for (int co = 0; co < cout; ++co) {
      for (int ci = 0; ci < cin; ++ci) {
        const double* gc = dout.data.data() + static_cast<size_t>(co) * oh * ow;
        const double* xc = x.data.data() + static_cast<size_t>(ci) * h * w;
        double* kc = dk->data.data() + (static_cast<size_t>(co) * cin + ci) * kh * kw;
        for (int u = 0; u < kh; ++u) {
          for (int v = 0; v < kw; ++v) {
            double acc = 0.0;
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * stride - pad + u;
              if (iy < 0 || iy >= h) continue;
              const double* xrow = xc + static_cast<size_t>(iy) * w;
              const double* grow = gc + static_cast<size_t>(oy) * ow;
              for (int ox = 0; ox < ow; ++ox) {
                const int ix = ox * stride - pad + v;
                if (ix < 0 || ix >= w) continue;
                acc += xrow[ix] * grow[ox];
              }
            }
            kc[u * kw + v] += acc;
          }
        }
      }
    }
  }

  if (dbias) {
    if (dbias->shape != std::vector<int>{cout}) *dbias = Tensor({cout});
#pragma omp parallel for schedule(static)
    for (int co = 0; co < cout; ++co) {
      const double* gc = dout.data.data() + static_cast<size_t>(co) * oh * ow;
      double acc = 0.0;
      for (int i = 0; i < oh * ow; ++i) acc += gc[i];
      dbias->data[co] += acc;
    }
  }
}

Tensor transposed_conv2d(const Tensor& x, const Tensor& k, const Tensor& bias, int stride) {
  check_conv_args(x, k, bias, stride, 0, 0);
  const int cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int cout = k.dim(1), kh = k.dim(2), kw = k.dim(3);
  const int oh = (h - 1) * stride + kh;
  const int ow = (w - 1) * stride + kw;
  Tensor out({cout, oh, ow});

  // Gather formulation: each output cell sums the input cells that stride onto
  // it. Disjoint writes keep the loop deterministic under OpenMP.
#pragma omp parallel for schedule(static)
  for (int co = 0; co < cout; ++co) {
    double* oc = out.data.data() + static_cast<size_t>(co) * oh * ow;
    const double b = bias.data.empty() ? 0.0 : bias.data[co];
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = b;
        for (int u = 0; u < kh; ++u) {
          const int ty = oy - u;
          if (ty < 0 || ty % stride != 0) continue;
          const int iy = ty / stride;
          if (iy >= h) continue;
          for (int v = 0; v < kw; ++v) {
            const int tx = ox - v;
            if (tx < 0 || tx % stride != 0) continue;
            const int ix = tx / stride;
            if (ix >= w) continue;
            for (int ci = 0; ci < cin; ++ci) {
              acc += x.at(ci, iy, ix) * k.data[((static_cast<size_t>(ci) * cout + co) * kh + u) * kw + v];
            }
          }
        }
        oc[static_cast<size_t>(oy) * ow + ox] = acc;
      }
    }
  }
  return out;
}

void transposed_conv2d_backward(const Tensor& x, const Tensor& k, int stride,
                                const Tensor& dout, Tensor* dx, Tensor* dk, Tensor* dbias) {
  const int cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int cout = k.dim(1), kh = k.dim(2), kw = k.dim(3);
  const int oh = dout.dim(1), ow = dout.dim(2);

  if (dx) {
    // dx[ci,iy,ix] = sum_{co,u,v} dout[co, iy*s+u, ix*s+v] * k[ci,co,u,v]
    if (dx->shape != x.shape) *dx = Tensor(x.shape);
#pragma omp parallel for schedule(static)
    for (int ci = 0; ci < cin; ++ci) {
      double* dc = dx->data.data() + static_cast<size_t>(ci) * h * w;
      for (int iy = 0; iy < h; ++iy) {
        for (int ix = 0; ix < w; ++ix) {
          double acc = 0.0;
          for (int co = 0; co < cout; ++co) {
            const double* gc = dout.data.data() + static_cast<size_t>(co) * oh * ow;
            const double* kc = k.data.data() + (static_cast<size_t>(ci) * cout + co) * kh * kw;
            for (int u = 0; u < kh; ++u) {
              for (int v = 0; v < kw; ++v) {
                acc += gc[static_cast<size_t>(iy * stride + u) * ow + ix * stride + v] * kc[u * kw + v];
              }
            }
          }
          dc[static_cast<size_t>(iy) * w + ix] = acc;
        }
      }
    }
  }

  if (dk) {
    if (dk->shape != k.shape) *dk = Tensor(k.shape);
#pragma omp parallel for schedule(static) collapse(2)
    for (int ci = 0; ci < cin; ++ci) {
      for (int co = 0; co < cout; ++co) {
        const double* xc = x.data.data() + static_cast<size_t>(ci) * h * w;
        const double* gc = dout.data.data() + static_cast<size_t>(co) * oh * ow;
        double* kc = dk->data.data() + (static_cast<size_t>(ci) * cout + co) * kh * kw;
        for (int u = 0; u < kh; ++u) {
          for (int v = 0; v < kw; ++v) {
            double acc = 0.0;
            for (int iy = 0; iy < h; ++iy) {
              for (int ix = 0; ix < w; ++ix) {
                acc += xc[static_cast<size_t>(iy) * w + ix] *
                       gc[static_cast<size_t>(iy * stride + u) * ow + ix * stride + v];
              }
            }
            kc[u * kw + v] += acc;
          }
        }
      }
    }
  }

  if (dbias) {
    if (dbias->shape != std::vector<int>{cout}) *dbias = Tensor({cout});
#pragma omp parallel for schedule(static)
    for (int co = 0; co < cout; ++co) {
      const double* gc = dout.data.data() + static_cast<size_t>(co) * oh * ow;
      double acc = 0.0;
      for (int i = 0; i < oh * ow; ++i) acc += gc[i];
      dbias->data[co] += acc;
    }
  }
}

PoolOut maxpool(const Tensor& x, int kk) {
  if (x.rank() != 3) throw std::invalid_argument("maxpool: input must be [C,H,W]");
  if (kk < 1) throw std::invalid_argument("maxpool: window must be >= 1");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int oh = (h + kk - 1) / kk, ow = (w + kk - 1) / kk;
  PoolOut res;
  res.out = Tensor({c, oh, ow});
  res.argmax.assign(static_cast<size_t>(c) * oh * ow, 0);

#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch) {
    const double* xc = x.data.data() + static_cast<size_t>(ch) * h * w;
    double* oc = res.out.data.data() + static_cast<size_t>(ch) * oh * ow;
    int32_t* ac = res.argmax.data() + static_cast<size_t>(ch) * oh * ow;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const int y0 = oy * kk, x0 = ox * kk;
        const int y1 = std::min(y0 + kk, h), x1 = std::min(x0 + kk, w);
        double best = -std::numeric_limits<double>::infinity();
        int32_t arg = -1;
        for (int yy = y0; yy < y1; ++yy) {
          for (int xx = x0; xx < x1; ++xx) {
            const double v = xc[static_cast<size_t>(yy) * w + xx];
            if (v > best) {
              best = v;
              arg = static_cast<int32_t>(ch) * h * w + yy * w + xx;
            }
          }
        }
        oc[static_cast<size_t>(oy) * ow + ox] = best;
        ac[static_cast<size_t>(oy) * ow + ox] = arg;
      }
    }
  }
  return res;
}

Tensor maxpool_backward(const std::vector<int32_t>& argmax, const std::vector<int>& in_shape,
                        const Tensor& dout) {
  Tensor dx(in_shape);
  // Argmax indices are unique per output cell and windows are disjoint, but a
  // serial scatter keeps this trivially deterministic; it is never a hot spot.
  for (size_t i = 0; i < argmax.size(); ++i) {
    dx.data[static_cast<size_t>(argmax[i])] += dout.data[i];
  }
  return dx;
}

Tensor relu(const Tensor& x) {
  Tensor y(x.shape);
  const int64_t n = x.size();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& pre, const Tensor& dout) {
  Tensor dx(pre.shape);
  const int64_t n = pre.size();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) dx.data[i] = pre.data[i] > 0.0 ? dout.data[i] : 0.0;
  return dx;
}

Tensor softmax_rows(const Tensor& x) {
  if (x.rank() != 2) throw std::invalid_argument("softmax_rows: input must be [N,C]");
  const int n = x.dim(0), c = x.dim(1);
  Tensor y(x.shape);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double* row = x.data.data() + static_cast<size_t>(i) * c;
    double* out = y.data.data() + static_cast<size_t>(i) * c;
    double m = row[0];
    for (int j = 1; j < c; ++j) m = std::max(m, row[j]);
    double z = 0.0;
    for (int j = 0; j < c; ++j) {
      out[j] = std::exp(row[j] - m);
      z += out[j];
    }
    for (int j = 0; j < c; ++j) out[j] /= z;
  }
  return y;
}

Tensor dropout(const Tensor& x, double rate, uint64_t key) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
  if (rate == 0.0) return x;
  Tensor y(x.shape);
  const double scale = 1.0 / (1.0 - rate);
  const int64_t n = x.size();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    const bool keep = u01_from_bits(mix64(key, static_cast<uint64_t>(i))) >= rate;
    y.data[i] = keep ? x.data[i] * scale : 0.0;
  }
  return y;
}

Tensor dropout_backward(const Tensor& dout, double rate, uint64_t key) {
  if (rate == 0.0) return dout;
  Tensor dx(dout.shape);
  const double scale = 1.0 / (1.0 - rate);
  const int64_t n = dout.size();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    const bool keep = u01_from_bits(mix64(key, static_cast<uint64_t>(i))) >= rate;
    dx.data[i] = keep ? dout.data[i] * scale : 0.0;
  }
  return dx;
}

Tensor resize_nearest(const Tensor& x, int h2, int w2) {
  if (x.rank() != 3) throw std::invalid_argument("resize_nearest: input must be [C,H,W]");
  if (h2 < 1 || w2 < 1) throw std::invalid_argument("resize_nearest: target size must be >= 1");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor y({c, h2, w2});
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch) {
    const double* xc = x.data.data() + static_cast<size_t>(ch) * h * w;
    double* yc = y.data.data() + static_cast<size_t>(ch) * h2 * w2;
    for (int oy = 0; oy < h2; ++oy) {
      const int iy = static_cast<int>(static_cast<int64_t>(oy) * h / h2);
      for (int ox = 0; ox < w2; ++ox) {
        const int ix = static_cast<int>(static_cast<int64_t>(ox) * w / w2);
        yc[static_cast<size_t>(oy) * w2 + ox] = xc[static_cast<size_t>(iy) * w + ix];
      }
    }
  }
  return y;
}

Tensor resize_nearest_backward(const Tensor& dout, int h, int w) {
  const int c = dout.dim(0), h2 = dout.dim(1), w2 = dout.dim(2);
  Tensor dx({c, h, w});
  // Source cell (sy,sx) collects the destination range mapping onto it:
  // oy in [ceil(sy*h2/h), ceil((sy+1)*h2/h)).
  auto lo = [](int s, int dst, int src) { return static_cast<int>((static_cast<int64_t>(s) * dst + src - 1) / src); };
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch) {
    const double* gc = dout.data.data() + static_cast<size_t>(ch) * h2 * w2;
    double* dc = dx.data.data() + static_cast<size_t>(ch) * h * w;
    for (int sy = 0; sy < h; ++sy) {
      const int oy0 = lo(sy, h2, h), oy1 = lo(sy + 1, h2, h);
      for (int sx = 0; sx < w; ++sx) {
        const int ox0 = lo(sx, w2, w), ox1 = lo(sx + 1, w2, w);
        double acc = 0.0;
        for (int oy = oy0; oy < oy1; ++oy) {
          for (int ox = ox0; ox < ox1; ++ox) acc += gc[static_cast<size_t>(oy) * w2 + ox];
        }
        dc[static_cast<size_t>(sy) * w + sx] = acc;
      }
    }
  }
  return dx;
}

Tensor concat_channels(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_channels: no inputs");
  const int h = parts[0]->dim(1), w = parts[0]->dim(2);
  int c = 0;
  for (const Tensor* t : parts) {
    if (t->rank() != 3 || t->dim(1) != h || t->dim(2) != w) {
      throw std::invalid_argument("concat_channels: spatial shape mismatch");
    }
    c += t->dim(0);
  }
  Tensor y({c, h, w});
  size_t off = 0;
  for (const Tensor* t : parts) {
    std::copy(t->data.begin(), t->data.end(), y.data.begin() + off);
    off += t->data.size();
  }
  return y;
}

std::vector<Tensor> split_channels(const Tensor& dout, const std::vector<int>& channels) {
  std::vector<Tensor> parts;
  const int h = dout.dim(1), w = dout.dim(2);
  size_t off = 0;
  for (int c : channels) {
    Tensor t({c, h, w});
    std::copy(dout.data.begin() + off, dout.data.begin() + off + t.data.size(), t.data.begin());
    off += t.data.size();
    parts.push_back(std::move(t));
  }
  if (off != dout.data.size()) throw std::invalid_argument("split_channels: channel counts do not cover input");
  return parts;
}

}  // namespace cdssd::kernels
