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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtseg/checkpoint.hpp"
#include "mtseg/data.hpp"
#include "mtseg/image.hpp"

namespace mtseg {

struct Confusion {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  bool operator==(const Confusion&) const = default;
};

/// Foreground (1) is the positive class.
Confusion confusion(const BinaryMask& pred, const BinaryMask& gt);

// Each ratio is 1 when its denominator is 0.
double dice_score(const Confusion& c);
double iou_foreground(const Confusion& c);
double iou_background(const Confusion& c);
double miou(const Confusion& c);
double sensitivity(const Confusion& c);
double precision(const Confusion& c);

/// Exact squared Euclidean distance from every pixel to the nearest
/// foreground pixel of `mask`. Requires a nonempty mask.
std::vector<std::uint64_t> squared_distance_transform(const BinaryMask& mask);

/// Symmetric Hausdorff distance in pixels. Empty when exactly one mask has
/// no foreground, 0 when both are empty.
std::optional<double> hausdorff(const BinaryMask& a, const BinaryMask& b);

struct ImageMetrics {
  std::string id;
  double dice = 0, iou_fg = 0, iou_bg = 0, miou = 0, sensitivity = 0, precision = 0;
  std::optional<double> hd;
};

struct MetricAggregate {
  std::size_t images = 0;
  double dice = 0, iou_fg = 0, iou_bg = 0, miou = 0, sensitivity = 0, precision = 0;
  std::optional<double> hd;   // mean over images where it is defined
  std::size_t hd_excluded = 0;
};

struct MetricReport {
  std::vector<ImageMetrics> per_image;
  MetricAggregate aggregate;
};

ImageMetrics image_metrics(const std::string& id, const BinaryMask& pred, const BinaryMask& gt);
MetricAggregate aggregate_metrics(std::span<const ImageMetrics> rows);

/// Scores predictions against the masks of `val`, in order.
MetricReport evaluate_predictions(std::span<const BinaryMask> predictions, std::span<const ImageSample> val);
/// Teacher prediction for every validation image, then evaluate_predictions.
MetricReport evaluate(const Checkpoint& ckpt, std::span<const ImageSample> val);

/// Header id,dice,iou_fg,iou_bg,miou,sensitivity,precision,hd; one row per
/// image, then an AGGREGATE row. Undefined HD is written as NA.
std::string report_csv(const MetricReport& report);

}  // namespace mtseg
