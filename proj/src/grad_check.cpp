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

#include "cdssd/grad_check.hpp"

#include <cmath>
#include <stdexcept>

#include "cdssd/rng.hpp"

namespace cdssd {

double grad_check(const DiffOp& op, const std::vector<Tensor>& inputs, double eps, uint64_t seed) {
  if (eps < 1e-6 || eps > 1e-2) {
    throw std::invalid_argument("grad_check(" + op.name + "): eps must be in [1e-6, 1e-2]");
  }

  const Tensor out0 = op.forward(inputs);
  Tensor weights(out0.shape);
  Rng rng(seed);
  for (auto& w : weights.data) w = rng.uniform(-1.0, 1.0);

  auto loss = [&](const std::vector<Tensor>& in) {
    const Tensor out = op.forward(in);
    double s = 0.0;
    for (size_t i = 0; i < out.data.size(); ++i) s += out.data[i] * weights.data[i];
    return s;
  };

  const std::vector<Tensor> analytic = op.backward(inputs, weights);
  if (analytic.size() != inputs.size()) {
    throw std::runtime_error("grad_check(" + op.name + "): backward returned wrong arity");
  }
  for (const Tensor& g : analytic) {
    if (!all_finite(g)) throw std::runtime_error("grad_check(" + op.name + "): non-finite gradient");
  }

  double max_err = 0.0;
  std::vector<Tensor> probe = inputs;
  for (size_t t = 0; t < inputs.size(); ++t) {
    for (size_t j = 0; j < inputs[t].data.size(); ++j) {
      const double saved = probe[t].data[j];
      probe[t].data[j] = saved + eps;
      const double lp = loss(probe);
      probe[t].data[j] = saved - eps;
      const double lm = loss(probe);
      probe[t].data[j] = saved;
      const double fd = (lp - lm) / (2.0 * eps);
      const double a = analytic[t].data[j];
      const double err = std::abs(a - fd) / std::max(1.0, std::abs(a));
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

}  // namespace cdssd
