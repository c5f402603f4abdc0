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

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtseg {

/// Interleaved RGB image, H×W×3, values in [0,1].
struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;

  RgbImage() = default;
  RgbImage(std::size_t h, std::size_t w, float fill = 0.0f)
      : height(h), width(w), values(h * w * 3, fill) {}

  float& at(std::size_t r, std::size_t c, std::size_t ch) { return values[(r * width + c) * 3 + ch]; }
  float at(std::size_t r, std::size_t c, std::size_t ch) const {
    return values[(r * width + c) * 3 + ch];
  }

  bool operator==(const RgbImage&) const = default;
};

/// Per-pixel {0,1} labels, row-major H×W.
struct BinaryMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> values;

  BinaryMask() = default;
  BinaryMask(std::size_t h, std::size_t w, std::uint8_t fill = 0) : height(h), width(w), values(h * w, fill) {}

  std::uint8_t& at(std::size_t r, std::size_t c) { return values[r * width + c]; }
  std::uint8_t at(std::size_t r, std::size_t c) const { return values[r * width + c]; }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : values) n += v;
    return n;
  }
  bool empty_foreground() const { return count() == 0; }

  bool operator==(const BinaryMask&) const = default;
};

inline void require_binary(const BinaryMask& mask) {
  for (auto v : mask.values) {
    if (v > 1) throw std::invalid_argument("mask value " + std::to_string(v) + " is not in {0,1}");
  }
}

}  // namespace mtseg
