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

#include "mtseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "mtseg/trainer.hpp"

namespace mtseg {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

void require_same_shape(const BinaryMask& a, const BinaryMask& b, const char* what) {
  if (a.height != b.height || a.width != b.width) {
    throw std::invalid_argument(std::string(what) + ": mask shapes differ (" + std::to_string(a.height) + "x" +
                                std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                                std::to_string(b.width) + ")");
  }
}

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher). All inputs are
// integers, so the result is exact.
void distance_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<std::size_t>& v,
                 std::vector<double>& z) {
  const std::size_t n = f.size();
  std::size_t k = 0;
  v[0] = 0;
  z[0] = -INFINITY;
  z[1] = INFINITY;
  auto intersect = [&](std::size_t q, std::size_t p) {
    const double qd = static_cast<double>(q), pd = static_cast<double>(p);
    return ((f[q] + qd * qd) - (f[p] + pd * pd)) / (2.0 * qd - 2.0 * pd);
  };
  for (std::size_t q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = INFINITY;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double dq = static_cast<double>(q) - static_cast<double>(v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_value(*v) : "NA"; }

}  // namespace

Confusion confusion(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt, "confusion");
  Confusion c;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const bool p = pred.values[i] != 0, g = gt.values[i] != 0;
    if (p && g) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (g) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

double dice_score(const Confusion& c) { return ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn); }
double iou_foreground(const Confusion& c) { return ratio(c.tp, c.tp + c.fp + c.fn); }
double iou_background(const Confusion& c) { return ratio(c.tn, c.tn + c.fp + c.fn); }
double miou(const Confusion& c) { return 0.5 * (iou_foreground(c) + iou_background(c)); }
double sensitivity(const Confusion& c) { return ratio(c.tp, c.tp + c.fn); }
double precision(const Confusion& c) { return ratio(c.tp, c.tp + c.fp); }

std::vector<std::uint64_t> squared_distance_transform(const BinaryMask& mask) {
  const std::size_t H = mask.height, W = mask.width;
  if (mask.empty_foreground()) throw std::invalid_argument("distance transform of an empty mask");
  // Larger than any real squared distance inside the grid.
  const double far = 2.0 * static_cast<double>(H * H + W * W) + 1.0;
  std::vector<double> grid(H * W);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = mask.values[i] ? 0.0 : far;

  const std::size_t n = std::max(H, W);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<std::size_t> v(n);
  for (std::size_t c = 0; c < W; ++c) {
    f.resize(H);
    d.resize(H);
    for (std::size_t r = 0; r < H; ++r) f[r] = grid[r * W + c];
    distance_1d(f, d, v, z);
    for (std::size_t r = 0; r < H; ++r) grid[r * W + c] = d[r];
  }
  for (std::size_t r = 0; r < H; ++r) {
    f.resize(W);
    d.resize(W);
    for (std::size_t c = 0; c < W; ++c) f[c] = grid[r * W + c];
    distance_1d(f, d, v, z);
    for (std::size_t c = 0; c < W; ++c) grid[r * W + c] = d[c];
  }
  std::vector<std::uint64_t> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = static_cast<std::uint64_t>(grid[i]);
  return out;
}

std::optional<double> hausdorff(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "hausdorff");
  const bool a_empty = a.empty_foreground(), b_empty = b.empty_foreground();
  if (a_empty && b_empty) return 0.0;
  if (a_empty || b_empty) return std::nullopt;
  const auto to_b = squared_distance_transform(b);
  const auto to_a = squared_distance_transform(a);
  std::uint64_t worst = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (a.values[i]) worst = std::max(worst, to_b[i]);
    if (b.values[i]) worst = std::max(worst, to_a[i]);
  }
  return std::sqrt(static_cast<double>(worst));
}

ImageMetrics image_metrics(const std::string& id, const BinaryMask& pred, const BinaryMask& gt) {
  const Confusion c = confusion(pred, gt);
  ImageMetrics m;
  m.id = id;
  m.dice = dice_score(c);
  m.iou_fg = iou_foreground(c);
  m.iou_bg = iou_background(c);
  m.miou = miou(c);
  m.sensitivity = sensitivity(c);
  m.precision = precision(c);
  m.hd = hausdorff(pred, gt);
  return m;
}

MetricAggregate aggregate_metrics(std::span<const ImageMetrics> rows) {
  MetricAggregate a;
  a.images = rows.size();
  if (rows.empty()) return a;
  double hd_sum = 0.0;
  std::size_t hd_count = 0;
  for (const auto& r : rows) {
    a.dice += r.dice;
    a.iou_fg += r.iou_fg;
    a.iou_bg += r.iou_bg;
    a.miou += r.miou;
    a.sensitivity += r.sensitivity;
    a.precision += r.precision;
    if (r.hd) {
      hd_sum += *r.hd;
      ++hd_count;
    } else {
      ++a.hd_excluded;
    }
  }
  const double n = static_cast<double>(rows.size());
  a.dice /= n;
  a.iou_fg /= n;
  a.iou_bg /= n;
  a.miou /= n;
  a.sensitivity /= n;
  a.precision /= n;
  if (hd_count > 0) a.hd = hd_sum / static_cast<double>(hd_count);
  return a;
}

MetricReport evaluate_predictions(std::span<const BinaryMask> predictions, std::span<const ImageSample> val) {
  if (predictions.size() != val.size()) throw std::invalid_argument("evaluate: prediction count differs from sample count");
  MetricReport report;
  report.per_image.resize(val.size());
  for (std::size_t i = 0; i < val.size(); ++i) {
    if (!val[i].mask) throw std::invalid_argument("evaluate: sample '" + val[i].id + "' has no mask");
    report.per_image[i] = image_metrics(val[i].id, predictions[i], *val[i].mask);
  }
  report.aggregate = aggregate_metrics(report.per_image);
  return report;
}

MetricReport evaluate(const Checkpoint& ckpt, std::span<const ImageSample> val) {
  for (const auto& s : val) {
    if (!s.mask) throw std::invalid_argument("evaluate: sample '" + s.id + "' has no mask");
  }
  const UNet<float> net(ckpt.model);
  std::vector<BinaryMask> predictions;
  predictions.reserve(val.size());
  for (const auto& s : val) predictions.push_back(predict(net, ckpt.teacher, s.pixels));
  return evaluate_predictions(predictions, val);
}

std::string report_csv(const MetricReport& report) {
  std::string out = "id,dice,iou_fg,iou_bg,miou,sensitivity,precision,hd\n";
  auto row = [&](const std::string& id, double dice, double iou_fg, double iou_bg, double mi, double sens,
                 double prec, const std::optional<double>& hd) {
    out += id + "," + format_value(dice) + "," + format_value(iou_fg) + "," + format_value(iou_bg) + "," +
           format_value(mi) + "," + format_value(sens) + "," + format_value(prec) + "," + format_optional(hd) + "\n";
  };
  for (const auto& r : report.per_image) row(r.id, r.dice, r.iou_fg, r.iou_bg, r.miou, r.sensitivity, r.precision, r.hd);
  const auto& a = report.aggregate;
  row("AGGREGATE", a.dice, a.iou_fg, a.iou_bg, a.miou, a.sensitivity, a.precision, a.hd);
  return out;
}

}  // namespace mtseg
