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

// Times the OpenMP kernels against their serial reference twins on the
// feature-map sizes the desk profile actually runs.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "cdssd/kernels.hpp"
#include "cdssd/ref_kernels.hpp"
#include "cdssd/rng.hpp"

using namespace cdssd;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.data) v = rng.uniform(-1.0, 1.0);
  return t;
}

double time_ms(const std::function<void()>& fn, int iters) {
  fn();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < iters; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / iters;
}

void row(const std::string& name, double ref_ms, double omp_ms) {
  std::printf("%-36s %10.3f %10.3f %9.2fx\n", name.c_str(), ref_ms, omp_ms, ref_ms / omp_ms);
}

}  // namespace

int main() {
  Rng rng(42);
  const Tensor none;
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-36s %10s %10s %10s\n", "kernel", "serial ms", "omp ms", "speedup");

  struct ConvCase {
    int cin, h, cout;
  };
  for (const ConvCase c : {ConvCase{3, 96, 8}, {8, 48, 16}, {16, 24, 32}, {32, 48, 32}}) {
    const Tensor x = random_tensor({c.cin, c.h, c.h}, rng);
    const Tensor k = random_tensor({c.cout, c.cin, 3, 3}, rng);
    const int iters = c.h >= 96 ? 50 : 200;
    const double ref_ms = time_ms([&] { ref::conv2d(x, k, none, 1, 1); }, iters);
    const double omp_ms = time_ms([&] { kernels::conv2d(x, k, none, 1, 1); }, iters);
    char name[64];
    std::snprintf(name, sizeof(name), "conv2d 3x3  %dx%dx%d -> %d", c.cin, c.h, c.h, c.cout);
    row(name, ref_ms, omp_ms);
  }

  for (const ConvCase c : {ConvCase{64, 6, 32}, {16, 24, 8}}) {
    const Tensor x = random_tensor({c.cin, c.h, c.h}, rng);
    const Tensor k = random_tensor({c.cin, c.cout, 2, 2}, rng);
    const double ref_ms = time_ms([&] { ref::transposed_conv2d(x, k, none, 2); }, 200);
    const double omp_ms = time_ms([&] { kernels::transposed_conv2d(x, k, none, 2); }, 200);
    char name[64];
    std::snprintf(name, sizeof(name), "tconv2d 2x2 s2  %dx%dx%d -> %d", c.cin, c.h, c.h, c.cout);
    row(name, ref_ms, omp_ms);
  }

  {
    const Tensor x = random_tensor({16, 96, 96}, rng);
    const double ref_ms = time_ms([&] { ref::maxpool(x, 2); }, 200);
    const double omp_ms = time_ms([&] { kernels::maxpool(x, 2); }, 200);
    row("maxpool2 16x96x96", ref_ms, omp_ms);
  }
  {
    const Tensor x = random_tensor({4000, 25}, rng);
    const double ref_ms = time_ms([&] { ref::softmax_rows(x); }, 200);
    const double omp_ms = time_ms([&] { kernels::softmax_rows(x); }, 200);
    row("softmax_rows 4000x25", ref_ms, omp_ms);
  }
  return 0;
}
