// Copyright 2026 The mtseg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Reference vs parallel kernels on U-Net-sized activations.
//
//   ./bench_kernels --benchmark_filter=Conv

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mtseg/kernels.hpp"

namespace {

using mtseg::kernels::Backend;
using mtseg::kernels::ConvShape;
using mtseg::kernels::PlaneShape;

std::vector<float> random_vector(std::size_t n, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (float& x : v) x = dist(gen);
  return v;
}

Backend backend_arg(const benchmark::State& state) {
  return state.range(0) == 0 ? Backend::reference : Backend::parallel;
}

// Args: backend, batch, channels, side.
void conv_args(benchmark::internal::Benchmark* b) {
  for (int backend : {0, 1}) {
    b->Args({backend, 8, 16, 64});
    b->Args({backend, 8, 64, 16});
  }
  b->ArgNames({"parallel", "batch", "ch", "side"});
  b->Unit(benchmark::kMillisecond);
}

ConvShape conv_shape(const benchmark::State& state) {
  ConvShape s;
  s.batch = static_cast<std::size_t>(state.range(1));
  s.in_channels = static_cast<std::size_t>(state.range(2));
  s.out_channels = s.in_channels;
  s.height = s.width = static_cast<std::size_t>(state.range(3));
  return s;
}

void BM_ConvForward(benchmark::State& state) {
  const ConvShape s = conv_shape(state);
  const auto x = random_vector(s.input_size(), 1);
  const auto w = random_vector(s.weight_size(), 2);
  const auto bias = random_vector(s.out_channels, 3);
  std::vector<float> y(s.output_size());
  for (auto _ : state) {
    mtseg::kernels::conv2d_forward<float>(backend_arg(state), s, x, w, bias, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.batch));
}
BENCHMARK(BM_ConvForward)->Apply(conv_args);

void BM_ConvBackward(benchmark::State& state) {
  const ConvShape s = conv_shape(state);
  const auto x = random_vector(s.input_size(), 1);
  const auto w = random_vector(s.weight_size(), 2);
  const auto dy = random_vector(s.output_size(), 3);
  std::vector<float> dx(s.input_size()), dw(s.weight_size()), db(s.out_channels);
  for (auto _ : state) {
    mtseg::kernels::conv2d_backward<float>(backend_arg(state), s, x, w, dy, dx, dw, db);
    benchmark::DoNotOptimize(dx.data());
    benchmark::DoNotOptimize(dw.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.batch));
}
BENCHMARK(BM_ConvBackward)->Apply(conv_args);

void plane_args(benchmark::internal::Benchmark* b) {
  for (int backend : {0, 1}) b->Args({backend});
  b->ArgNames({"parallel"});
  b->Unit(benchmark::kMicrosecond);
}

constexpr PlaneShape kPlane{8, 16, 64, 64};

void BM_MaxPool(benchmark::State& state) {
  const auto x = random_vector(kPlane.size(), 1);
  std::vector<float> y(kPlane.size() / 4), dx(kPlane.size());
  std::vector<std::uint32_t> argmax(y.size());
  for (auto _ : state) {
    mtseg::kernels::maxpool2x2_forward<float>(backend_arg(state), kPlane, x, y, argmax);
    mtseg::kernels::maxpool2x2_backward<float>(backend_arg(state), kPlane, y, argmax, dx);
    benchmark::DoNotOptimize(dx.data());
  }
}
BENCHMARK(BM_MaxPool)->Apply(plane_args);

void BM_Upsample(benchmark::State& state) {
  const auto x = random_vector(kPlane.size(), 1);
  std::vector<float> y(kPlane.size() * 4), dx(kPlane.size());
  for (auto _ : state) {
    mtseg::kernels::upsample2x_forward<float>(backend_arg(state), kPlane, x, y);
    mtseg::kernels::upsample2x_backward<float>(backend_arg(state), kPlane, y, dx);
    benchmark::DoNotOptimize(dx.data());
  }
}
BENCHMARK(BM_Upsample)->Apply(plane_args);

}  // namespace

BENCHMARK_MAIN();
