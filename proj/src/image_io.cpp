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

#include "mtseg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace mtseg {

namespace {

std::vector<std::uint8_t> read_png(const std::filesystem::path& path, png_uint_32 format, std::size_t& height,
                                   std::size_t& width) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw std::runtime_error("cannot read PNG '" + path.string() + "': " + image.message);
  }
  image.format = format;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw std::runtime_error("cannot decode PNG '" + path.string() + "': " + msg);
  }
  height = image.height;
  width = image.width;
  return buffer;
}

void write_png(const std::filesystem::path& path, png_uint_32 format, std::size_t height, std::size_t width,
               const std::vector<std::uint8_t>& buffer) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.format = format;
  image.height = static_cast<png_uint_32>(height);
  image.width = static_cast<png_uint_32>(width);
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw std::runtime_error("cannot write PNG '" + path.string() + "': " + image.message);
  }
}

}  // namespace

RgbImage read_png_rgb(const std::filesystem::path& path) {
  RgbImage img;
  const auto bytes = read_png(path, PNG_FORMAT_RGB, img.height, img.width);
  img.values.resize(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) img.values[i] = static_cast<float>(bytes[i]) / 255.0f;
  return img;
}

void write_png_rgb(const std::filesystem::path& path, const RgbImage& image) {
  std::vector<std::uint8_t> bytes(image.values.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const float v = std::clamp(image.values[i], 0.0f, 1.0f);
    bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  write_png(path, PNG_FORMAT_RGB, image.height, image.width, bytes);
}

BinaryMask read_png_mask(const std::filesystem::path& path) {
  BinaryMask mask;
  const auto bytes = read_png(path, PNG_FORMAT_GRAY, mask.height, mask.width);
  mask.values.resize(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) mask.values[i] = bytes[i] > 127 ? 1 : 0;
  return mask;
}

void write_png_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  require_binary(mask);
  std::vector<std::uint8_t> bytes(mask.values.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.values[i] ? 255 : 0;
  write_png(path, PNG_FORMAT_GRAY, mask.height, mask.width, bytes);
}

}  // namespace mtseg
