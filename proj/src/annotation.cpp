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

#include "mtseg/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace mtseg {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("annotation: " + path + ": " + what);
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

std::size_t positive_int(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() <= 0) fail(path, "expected a positive integer");
  return v.get<std::size_t>();
}

}  // namespace

void validate_annotation(const PolygonAnnotation& ann) {
  if (ann.height == 0) fail("height", "must be positive");
  if (ann.width == 0) fail("width", "must be positive");
  for (std::size_t i = 0; i < ann.shapes.size(); ++i) {
    const std::string path = "shapes[" + std::to_string(i) + "]";
    const auto& pts = ann.shapes[i].points;
    if (pts.size() < 3) {
      fail(path, "polygon has " + std::to_string(pts.size()) + " vertices, at least 3 required");
    }
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const auto& p = pts[j];
      const bool ok = std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 && p.y >= 0.0 &&
                      p.x <= static_cast<double>(ann.width) && p.y <= static_cast<double>(ann.height);
      if (!ok) fail(path + ".points[" + std::to_string(j) + "]", "vertex outside the image frame");
    }
  }
}

PolygonAnnotation load_annotation(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("annotation: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("$", "expected an object");

  PolygonAnnotation ann;
  const json& id = field(doc, "image_id", "");
  if (!id.is_string()) fail("image_id", "expected a string");
  ann.image_id = id.get<std::string>();
  ann.height = positive_int(field(doc, "height", ""), "height");
  ann.width = positive_int(field(doc, "width", ""), "width");

  const json& shapes = field(doc, "shapes", "");
  if (!shapes.is_array()) fail("shapes", "expected an array");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const std::string path = "shapes[" + std::to_string(i) + "]";
    const json& s = shapes[i];
    if (!s.is_object()) fail(path, "expected an object");
    PolygonShape shape;
    const json& label = field(s, "label", path);
    if (!label.is_string()) fail(path + ".label", "expected a string");
    shape.label = label.get<std::string>();
    const json& points = field(s, "points", path);
    if (!points.is_array()) fail(path + ".points", "expected an array");
    for (std::size_t j = 0; j < points.size(); ++j) {
      const json& p = points[j];
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        fail(path + ".points[" + std::to_string(j) + "]", "expected [x, y]");
      }
      shape.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    ann.shapes.push_back(std::move(shape));
  }
  validate_annotation(ann);
  return ann;
}

std::string serialize_annotation(const PolygonAnnotation& ann) {
  json doc;
  doc["image_id"] = ann.image_id;
  doc["height"] = ann.height;
  doc["width"] = ann.width;
  doc["shapes"] = json::array();
  for (const auto& s : ann.shapes) {
    json points = json::array();
    for (const auto& p : s.points) points.push_back({p.x, p.y});
    doc["shapes"].push_back({{"label", s.label}, {"points", points}});
  }
  return doc.dump(2);
}

BinaryMask rasterize_polygons(const PolygonAnnotation& ann) {
  validate_annotation(ann);
  BinaryMask mask(ann.height, ann.width);
  std::vector<double> crossings;
  for (const auto& shape : ann.shapes) {
    const auto& pts = shape.points;
    for (std::size_t r = 0; r < ann.height; ++r) {
      const double y = static_cast<double>(r) + 0.5;
      crossings.clear();
      for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
        const auto& a = pts[i];
        const auto& b = pts[j];
        if ((a.y > y) != (b.y > y)) crossings.push_back((b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x);
      }
      if (crossings.empty()) continue;
      std::sort(crossings.begin(), crossings.end());
      for (std::size_t c = 0; c < ann.width; ++c) {
        const double x = static_cast<double>(c) + 0.5;
        // Even-odd: count edges crossed by the ray towards +x.
        const auto right = crossings.end() - std::upper_bound(crossings.begin(), crossings.end(), x);
        if (right % 2 == 1) mask.at(r, c) = 1;
      }
    }
  }
  return mask;
}

}  // namespace mtseg
