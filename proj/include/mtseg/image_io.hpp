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

#include <filesystem>

#include "mtseg/image.hpp"

namespace mtseg {

/// 8-bit RGB PNG; values are divided by 255. Grayscale and alpha inputs are
/// converted to RGB.
RgbImage read_png_rgb(const std::filesystem::path& path);
/// Values in [0,1] are rounded to 8 bits.
void write_png_rgb(const std::filesystem::path& path, const RgbImage& image);

/// Single-channel 8-bit PNG; any stored value above 127 reads as 1.
BinaryMask read_png_mask(const std::filesystem::path& path);
/// Writes foreground as 255 and background as 0.
void write_png_mask(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace mtseg
