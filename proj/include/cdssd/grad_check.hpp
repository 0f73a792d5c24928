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
#include <functional>
#include <string>
#include <vector>

#include "cdssd/tensor.hpp"

namespace cdssd {

/// An operation under gradient verification: forward maps the inputs to one
/// output tensor; backward returns d(loss)/d(input) for each input given the
/// upstream gradient d(loss)/d(output).
struct DiffOp {
  std::string name;
  std::function<Tensor(const std::vector<Tensor>&)> forward;
  std::function<std::vector<Tensor>(const std::vector<Tensor>&, const Tensor&)> backward;
};

/// Verifies the analytic backward pass of `op` against central differences of
/// the scalar loss L = sum(w * forward(inputs)) with fixed random projection
/// weights w drawn from `seed`. Returns the max over all input elements of
///   |analytic - finite_difference| / max(1, |analytic|).
/// eps must lie in [1e-6, 1e-2]. Throws when the analytic gradient is
/// non-finite, naming the operation.
double grad_check(const DiffOp& op, const std::vector<Tensor>& inputs, double eps, uint64_t seed);

}  // namespace cdssd
