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

#include "cdssd/ref_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cdssd::ref {

Tensor conv2d(const Tensor& x, const Tensor& k, const Tensor& bias, int stride, int pad) {
  if (k.dim(1) != x.dim(0)) throw std::invalid_argument("ref::conv2d: channel mismatch");
  const int cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int cout = k.dim(0), kh = k.dim(2), kw = k.dim(3);
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (w + 2 * pad - kw) / stride + 1;
  Tensor out({cout, oh, ow});
  for (int co = 0; co < cout; ++co) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = bias.data.empty() ? 0.0 : bias.data[co];
        for (int ci = 0; ci < cin; ++ci) {
          for (int u = 0; u < kh; ++u) {
            for (int v = 0; v < kw; ++v) {
              const int iy = oy * stride - pad + u;
              const int ix = ox * stride - pad + v;
              if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
              acc += x.at(ci, iy, ix) * k.data[((static_cast<size_t>(co) * cin + ci) * kh + u) * kw + v];
            }
          }
        }
        out.at(co, oy, ox) = acc;
      }
    }
  }
  return out;
}

Tensor transposed_conv2d(const Tensor& x, const Tensor& k, const Tensor& bias, int stride) {
  if (k.dim(0) != x.dim(0)) throw std::invalid_argument("ref::transposed_conv2d: channel mismatch");
  const int cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int cout = k.dim(1), kh = k.dim(2), kw = k.dim(3);
  const int oh = (h - 1) * stride + kh;
  const int ow = (w - 1) * stride + kw;
  Tensor out({cout, oh, ow});
  if (!bias.data.empty()) {
    for (int co = 0; co < cout; ++co) {
      for (int i = 0; i < oh * ow; ++i) out.data[static_cast<size_t>(co) * oh * ow + i] = bias.data[co];
    }
  }
  for (int ci = 0; ci < cin; ++ci) {
    for (int iy = 0; iy < h; ++iy) {
      for (int ix = 0; ix < w; ++ix) {
        const double v = x.at(ci, iy, ix);
        for (int co = 0; co < cout; ++co) {
          for (int u = 0; u < kh; ++u) {
            for (int vv = 0; vv < kw; ++vv) {
              out.at(co, iy * stride + u, ix * stride + vv) +=
                  v * k.data[((static_cast<size_t>(ci) * cout + co) * kh + u) * kw + vv];
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor maxpool(const Tensor& x, int k) {
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int oh = (h + k - 1) / k, ow = (w + k - 1) / k;
  Tensor out({c, oh, ow});
  for (int ch = 0; ch < c; ++ch) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        for (int yy = oy * k; yy < std::min((oy + 1) * k, h); ++yy) {
          for (int xx = ox * k; xx < std::min((ox + 1) * k, w); ++xx) {
            best = std::max(best, x.at(ch, yy, xx));
          }
        }
        out.at(ch, oy, ox) = best;
      }
    }
  }
  return out;
}

Tensor softmax_rows(const Tensor& x) {
  const int n = x.dim(0), c = x.dim(1);
  Tensor y(x.shape);
  for (int i = 0; i < n; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < c; ++j) m = std::max(m, x.at(i, j));
    double z = 0.0;
    for (int j = 0; j < c; ++j) z += std::exp(x.at(i, j) - m);
    for (int j = 0; j < c; ++j) y.at(i, j) = std::exp(x.at(i, j) - m) / z;
  }
  return y;
}

Tensor relu(const Tensor& x) {
  Tensor y(x.shape);
  for (size_t i = 0; i < x.data.size(); ++i) y.data[i] = std::max(0.0, x.data[i]);
  return y;
}

}  // namespace cdssd::ref
