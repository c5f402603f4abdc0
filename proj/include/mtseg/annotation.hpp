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

#include <string>
#include <vector>

#include "mtseg/image.hpp"

namespace mtseg {

struct PolygonShape {
  struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
  };
  std::string label;
  std::vector<Point> points;

  bool operator==(const PolygonShape&) const = default;
};

struct PolygonAnnotation {
  std::string image_id;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<PolygonShape> shapes;

  bool operator==(const PolygonAnnotation&) const = default;
};

/// Positive size, at least three vertices per shape, vertices inside
/// [0,width]×[0,height]. Errors name the offending field path.
void validate_annotation(const PolygonAnnotation& ann);

/// Parses {"image_id", "height", "width", "shapes": [{"label", "points"}]}.
/// Other keys, as written by LabelMe, are ignored.
PolygonAnnotation load_annotation(const std::string& text);
std::string serialize_annotation(const PolygonAnnotation& ann);

/// Pixel (r,c) is foreground iff its center (c+0.5, r+0.5) lies inside any
/// polygon under the even-odd rule.
BinaryMask rasterize_polygons(const PolygonAnnotation& ann);

}  // namespace mtseg
