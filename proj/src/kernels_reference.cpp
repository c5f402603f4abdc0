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

#include <algorithm>
#include <cstdint>

#include "mtseg/kernels.hpp"

namespace mtseg::kernels {

std::string_view backend_name(Backend backend) {
  return backend == Backend::reference ? "reference" : "parallel";
}

namespace reference {

template <typename T>
void conv2d_forward(const ConvShape& s, std::span<const T> x, std::span<const T> weight,
                    std::span<const T> bias, std::span<T> y) {
  const auto H = static_cast<std::ptrdiff_t>(s.height);
  const auto W = static_cast<std::ptrdiff_t>(s.width);
  const auto K = static_cast<std::ptrdiff_t>(s.kernel);
  const auto P = static_cast<std::ptrdiff_t>(s.pad());
  for (std::size_t n = 0; n < s.batch; ++n) {
    for (std::size_t o = 0; o < s.out_channels; ++o) {
      for (std::ptrdiff_t r = 0; r < H; ++r) {
        for (std::ptrdiff_t c = 0; c < W; ++c) {
          T acc = bias[o];
          for (std::size_t i = 0; i < s.in_channels; ++i) {
            const T* xp = x.data() + (n * s.in_channels + i) * s.height * s.width;
            const T* wp = weight.data() + (o * s.in_channels + i) * s.kernel * s.kernel;
            for (std::ptrdiff_t kr = 0; kr < K; ++kr) {
              const std::ptrdiff_t rr = r + kr - P;
              if (rr < 0 || rr >= H) continue;
              for (std::ptrdiff_t kc = 0; kc < K; ++kc) {
                const std::ptrdiff_t cc = c + kc - P;
                if (cc < 0 || cc >= W) continue;
                acc += wp[kr * K + kc] * xp[rr * W + cc];
              }
            }
          }
          y[((n * s.out_channels + o) * s.height + r) * s.width + c] = acc;
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward(const ConvShape& s, std::span<const T> x, std::span<const T> weight,
                     std::span<const T> dy, std::span<T> dx, std::span<T> dweight,
                     std::span<T> dbias) {
  const auto H = static_cast<std::ptrdiff_t>(s.height);
  const auto W = static_cast<std::ptrdiff_t>(s.width);
  const auto K = static_cast<std::ptrdiff_t>(s.kernel);
  const auto P = static_cast<std::ptrdiff_t>(s.pad());
  std::fill(dweight.begin(), dweight.end(), T{0});
  std::fill(dbias.begin(), dbias.end(), T{0});
  if (!dx.empty()) std::fill(dx.begin(), dx.end(), T{0});

  for (std::size_t n = 0; n < s.batch; ++n) {
    for (std::size_t o = 0; o < s.out_channels; ++o) {
      const T* dyp = dy.data() + (n * s.out_channels + o) * s.height * s.width;
      for (std::ptrdiff_t r = 0; r < H; ++r) {
        for (std::ptrdiff_t c = 0; c < W; ++c) {
          const T g = dyp[r * W + c];
          dbias[o] += g;
          for (std::size_t i = 0; i < s.in_channels; ++i) {
            const std::size_t plane = (n * s.in_channels + i) * s.height * s.width;
            const std::size_t wbase = (o * s.in_channels + i) * s.kernel * s.kernel;
            for (std::ptrdiff_t kr = 0; kr < K; ++kr) {
              const std::ptrdiff_t rr = r + kr - P;
              if (rr < 0 || rr >= H) continue;
              for (std::ptrdiff_t kc = 0; kc < K; ++kc) {
                const std::ptrdiff_t cc = c + kc - P;
                if (cc < 0 || cc >= W) continue;
                dweight[wbase + kr * K + kc] += g * x[plane + rr * W + cc];
                if (!dx.empty()) dx[plane + rr * W + cc] += g * weight[wbase + kr * K + kc];
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void maxpool2x2_forward(const PlaneShape& in, std::span<const T> x, std::span<T> y,
                        std::span<std::uint32_t> argmax) {
  const std::size_t oh = in.height / 2;
  const std::size_t ow = in.width / 2;
  for (std::size_t p = 0; p < in.batch * in.channels; ++p) {
    const std::size_t ibase = p * in.height * in.width;
    for (std::size_t r = 0; r < oh; ++r) {
      for (std::size_t c = 0; c < ow; ++c) {
        std::size_t best = ibase + 2 * r * in.width + 2 * c;
        for (std::size_t dr = 0; dr < 2; ++dr) {
          for (std::size_t dc = 0; dc < 2; ++dc) {
            const std::size_t idx = ibase + (2 * r + dr) * in.width + 2 * c + dc;
            if (x[idx] > x[best]) best = idx;
          }
        }
        const std::size_t o = (p * oh + r) * ow + c;
        y[o] = x[best];
        argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

template <typename T>
void maxpool2x2_backward(const PlaneShape& in, std::span<const T> dy,
                         std::span<const std::uint32_t> argmax, std::span<T> dx) {
  std::fill(dx.begin(), dx.end(), T{0});
  const std::size_t out_size = in.batch * in.channels * (in.height / 2) * (in.width / 2);
  for (std::size_t o = 0; o < out_size; ++o) dx[argmax[o]] += dy[o];
}

template <typename T>
void upsample2x_forward(const PlaneShape& in, std::span<const T> x, std::span<T> y) {
  const std::size_t oh = in.height * 2;
  const std::size_t ow = in.width * 2;
  for (std::size_t p = 0; p < in.batch * in.channels; ++p) {
    for (std::size_t r = 0; r < oh; ++r) {
      for (std::size_t c = 0; c < ow; ++c) {
        y[(p * oh + r) * ow + c] = x[(p * in.height + r / 2) * in.width + c / 2];
      }
    }
  }
}

template <typename T>
void upsample2x_backward(const PlaneShape& in, std::span<const T> dy, std::span<T> dx) {
  const std::size_t ow = in.width * 2;
  for (std::size_t p = 0; p < in.batch * in.channels; ++p) {
    for (std::size_t r = 0; r < in.height; ++r) {
      for (std::size_t c = 0; c < in.width; ++c) {
        const std::size_t top = (p * in.height * 2 + 2 * r) * ow + 2 * c;
        const std::size_t bottom = top + ow;
        dx[(p * in.height + r) * in.width + c] =
            (dy[top] + dy[top + 1]) + (dy[bottom] + dy[bottom + 1]);
      }
    }
  }
}

#define MTSEG_INSTANTIATE(T)                                                                    \
  template void conv2d_forward<T>(const ConvShape&, std::span<const T>, std::span<const T>,     \
                                  std::span<const T>, std::span<T>);                           \
  template void conv2d_backward<T>(const ConvShape&, std::span<const T>, std::span<const T>,    \
                                   std::span<const T>, std::span<T>, std::span<T>,              \
                                   std::span<T>);                                               \
  template void maxpool2x2_forward<T>(const PlaneShape&, std::span<const T>, std::span<T>,      \
                                      std::span<std::uint32_t>);                                \
  template void maxpool2x2_backward<T>(const PlaneShape&, std::span<const T>,                   \
                                       std::span<const std::uint32_t>, std::span<T>);           \
  template void upsample2x_forward<T>(const PlaneShape&, std::span<const T>, std::span<T>);     \
  template void upsample2x_backward<T>(const PlaneShape&, std::span<const T>, std::span<T>);

MTSEG_INSTANTIATE(float)
MTSEG_INSTANTIATE(double)
#undef MTSEG_INSTANTIATE

}  // namespace reference
}  // namespace mtseg::kernels
