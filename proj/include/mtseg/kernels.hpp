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

// Compute kernels behind the network layers. Two backends implement the same
// contracts:
//
//   reference  straightforward serial loops; the oracle for tests
//   parallel   OpenMP over the batch, im2col + GEMM for convolutions
//
// Both are deterministic. The parallel backend reduces per-sample partial
// weight gradients in sample order, so results do not depend on the number
// of OpenMP threads.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace mtseg::kernels {

enum class Backend { reference, parallel };

std::string_view backend_name(Backend backend);

/// Square-kernel, stride-1 convolution with "same" zero padding (kernel / 2).
struct ConvShape {
  std::size_t batch = 1;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t kernel = 3;

  std::size_t pad() const { return kernel / 2; }
  std::size_t input_size() const { return batch * in_channels * height * width; }
  std::size_t output_size() const { return batch * out_channels * height * width; }
  std::size_t weight_size() const { return out_channels * in_channels * kernel * kernel; }
};

/// Geometry of an NCHW activation.
struct PlaneShape {
  std::size_t batch = 1;
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t size() const { return batch * channels * height * width; }
};

namespace reference {

template <typename T>
void conv2d_forward(const ConvShape& s, std::span<const T> x, std::span<const T> weight,
                    std::span<const T> bias, std::span<T> y);

// dx may be empty, in which case the input gradient is skipped.
// dweight and dbias are overwritten, not accumulated.
template <typename T>
void conv2d_backward(const ConvShape& s, std::span<const T> x, std::span<const T> weight,
                     std::span<const T> dy, std::span<T> dx, std::span<T> dweight,
                     std::span<T> dbias);

// argmax stores the flat input offset of the winner; ties go to the first
// element in row-major window order.
template <typename T>
void maxpool2x2_forward(const PlaneShape& in, std::span<const T> x, std::span<T> y,
                        std::span<std::uint32_t> argmax);

template <typename T>
void maxpool2x2_backward(const PlaneShape& in, std::span<const T> dy,
                         std::span<const std::uint32_t> argmax, std::span<T> dx);

template <typename T>
void upsample2x_forward(const PlaneShape& in, std::span<const T> x, std::span<T> y);

template <typename T>
void upsample2x_backward(const PlaneShape& in, std::span<const T> dy, std::span<T> dx);

}  // namespace reference

namespace parallel {

template <typename T>
void conv2d_forward(const ConvShape& s, std::span<const T> x, std::span<const T> weight,
                    std::span<const T> bias, std::span<T> y);

template <typename T>
void conv2d_backward(const ConvShape& s, std::span<const T> x, std::span<const T> weight,
                     std::span<const T> dy, std::span<T> dx, std::span<T> dweight,
                     std::span<T> dbias);

template <typename T>
void maxpool2x2_forward(const PlaneShape& in, std::span<const T> x, std::span<T> y,
                        std::span<std::uint32_t> argmax);

template <typename T>
void maxpool2x2_backward(const PlaneShape& in, std::span<const T> dy,
                         std::span<const std::uint32_t> argmax, std::span<T> dx);

template <typename T>
void upsample2x_forward(const PlaneShape& in, std::span<const T> x, std::span<T> y);

template <typename T>
void upsample2x_backward(const PlaneShape& in, std::span<const T> dy, std::span<T> dx);

}  // namespace parallel

// Backend dispatch.

template <typename T>
void conv2d_forward(Backend b, const ConvShape& s, std::span<const T> x, std::span<const T> weight,
                    std::span<const T> bias, std::span<T> y) {
  if (b == Backend::reference) {
    reference::conv2d_forward(s, x, weight, bias, y);
  } else {
    parallel::conv2d_forward(s, x, weight, bias, y);
  }
}

template <typename T>
void conv2d_backward(Backend b, const ConvShape& s, std::span<const T> x,
                     std::span<const T> weight, std::span<const T> dy, std::span<T> dx,
                     std::span<T> dweight, std::span<T> dbias) {
  if (b == Backend::reference) {
    reference::conv2d_backward(s, x, weight, dy, dx, dweight, dbias);
  } else {
    parallel::conv2d_backward(s, x, weight, dy, dx, dweight, dbias);
  }
}

template <typename T>
void maxpool2x2_forward(Backend b, const PlaneShape& in, std::span<const T> x, std::span<T> y,
                        std::span<std::uint32_t> argmax) {
  if (b == Backend::reference) {
    reference::maxpool2x2_forward(in, x, y, argmax);
  } else {
    parallel::maxpool2x2_forward(in, x, y, argmax);
  }
}

template <typename T>
void maxpool2x2_backward(Backend b, const PlaneShape& in, std::span<const T> dy,
                         std::span<const std::uint32_t> argmax, std::span<T> dx) {
  if (b == Backend::reference) {
    reference::maxpool2x2_backward(in, dy, argmax, dx);
  } else {
    parallel::maxpool2x2_backward(in, dy, argmax, dx);
  }
}

template <typename T>
void upsample2x_forward(Backend b, const PlaneShape& in, std::span<const T> x, std::span<T> y) {
  if (b == Backend::reference) {
    reference::upsample2x_forward(in, x, y);
  } else {
    parallel::upsample2x_forward(in, x, y);
  }
}

template <typename T>
void upsample2x_backward(Backend b, const PlaneShape& in, std::span<const T> dy,
                         std::span<T> dx) {
  if (b == Backend::reference) {
    reference::upsample2x_backward(in, dy, dx);
  } else {
    parallel::upsample2x_backward(in, dy, dx);
  }
}

}  // namespace mtseg::kernels
