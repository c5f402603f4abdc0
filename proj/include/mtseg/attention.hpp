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

#pragma once

// Concurrent spatial and channel squeeze & excitation (scSE).
//
//   cSE: z = spatial mean per channel, s = sigmoid(W2 relu(W1 z + b1) + b2),
//        out[c] = s[c] * x[c]
//   sSE: q = sigmoid(1x1 conv of x to one channel), out[c,i,j] = q[i,j] * x[c,i,j]
//   scSE = cSE + sSE
//
// All functions take a batch of NCHW activations.

#include <cstddef>
#include <span>
#include <vector>

#include "mtseg/kernels.hpp"

namespace mtseg {

template <typename T>
struct ChannelGateWeights {
  std::span<const T> fc1_weight;  // hidden × C
  std::span<const T> fc1_bias;    // hidden
  std::span<const T> fc2_weight;  // C × hidden
  std::span<const T> fc2_bias;    // C
};

template <typename T>
struct SpatialGateWeights {
  std::span<const T> weight;  // C (a 1×C×1×1 convolution)
  std::span<const T> bias;    // 1
};

template <typename T>
struct ScseWeights {
  ChannelGateWeights<T> channel;
  SpatialGateWeights<T> spatial;
};

template <typename T>
struct ScseGrads {
  std::span<T> fc1_weight, fc1_bias, fc2_weight, fc2_bias;
  std::span<T> sse_weight, sse_bias;
};

/// Hidden width of the channel gate: max(C / r, 1).
inline std::size_t cse_hidden_width(std::size_t channels, std::size_t reduction) {
  const std::size_t h = channels / (reduction == 0 ? 1 : reduction);
  return h == 0 ? 1 : h;
}

/// Intermediates kept by scse_forward for the backward pass.
template <typename T>
struct ScseCache {
  std::vector<T> pooled;        // N × C
  std::vector<T> hidden;        // N × hidden, post-ReLU
  std::vector<T> channel_gate;  // N × C
  std::vector<T> spatial_gate;  // N × H·W
};

template <typename T>
void cse_forward(const kernels::PlaneShape& shape, std::span<const T> x,
                 const ChannelGateWeights<T>& w, std::span<T> y);

template <typename T>
void sse_forward(const kernels::PlaneShape& shape, std::span<const T> x,
                 const SpatialGateWeights<T>& w, std::span<T> y);

template <typename T>
void scse_forward(const kernels::PlaneShape& shape, std::span<const T> x, const ScseWeights<T>& w,
                  std::span<T> y, ScseCache<T>* cache = nullptr);

/// Overwrites dx and every gradient span in `grads`.
template <typename T>
void scse_backward(const kernels::PlaneShape& shape, std::span<const T> x,
                   const ScseWeights<T>& w, const ScseCache<T>& cache, std::span<const T> dy,
                   std::span<T> dx, const ScseGrads<T>& grads);

}  // namespace mtseg
