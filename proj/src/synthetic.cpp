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

#include "mtseg/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace mtseg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxForeground = 0.5;
constexpr double kEmptyProbability = 0.12;
constexpr float kPixelNoise = 0.02f;

struct Blob {
  double cy, cx;      // center in pixels
  double ry, rx;      // semi-axes in pixels
  double angle;
  std::array<double, 3> harmonic_amp;
  std::array<double, 3> harmonic_phase;
  std::array<float, 3> color;

  // Signed margin (> 0 inside) in units of the local radius.
  double margin(double y, double x) const {
    const double dy = y - cy, dx = x - cx;
    const double c = std::cos(angle), s = std::sin(angle);
    const double u = (c * dx + s * dy) / rx;
    const double v = (-s * dx + c * dy) / ry;
    const double d = std::hypot(u, v);
    const double theta = std::atan2(v, u);
    double edge = 1.0;
    for (int k = 0; k < 3; ++k) edge += harmonic_amp[k] * std::cos((k + 2) * theta + harmonic_phase[k]);
    return edge - d;
  }
};

struct Wave {
  double ky, kx, phase, amp;
};

float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

Blob draw_blob(Rng& rng, const PatientStyle& style, double side) {
  Blob b;
  b.cy = uniform(rng, 0.15, 0.85) * side;
  b.cx = uniform(rng, 0.15, 0.85) * side;
  b.ry = uniform(rng, 0.06, 0.16) * side;
  b.rx = std::clamp(b.ry * uniform(rng, 0.6, 1.6), 0.05 * side, 0.2 * side);
  b.angle = uniform(rng, 0.0, kPi);
  for (int k = 0; k < 3; ++k) {
    b.harmonic_amp[k] = uniform(rng, 0.0, 0.12);
    b.harmonic_phase[k] = uniform(rng, 0.0, 2.0 * kPi);
  }
  for (int ch = 0; ch < 3; ++ch) {
    b.color[ch] = clamp01(style.lesion[ch] + style.lesion_jitter * uniform(rng, -1.0, 1.0));
  }
  return b;
}

}  // namespace

PatientStyle draw_patient_style(std::uint64_t seed, std::size_t patient) {
  Rng rng = make_stream({seed, kTagSynthetic, patient, 0});
  PatientStyle s;
  s.mucosa[0] = static_cast<float>(uniform(rng, 0.62, 0.85));
  s.mucosa[1] = static_cast<float>(uniform(rng, 0.42, 0.62));
  s.mucosa[2] = static_cast<float>(uniform(rng, 0.22, 0.45));
  s.texture_amplitude = static_cast<float>(uniform(rng, 0.03, 0.08));
  s.texture_frequency = static_cast<float>(uniform(rng, 2.0, 6.0));
  s.vignette = static_cast<float>(uniform(rng, 0.15, 0.45));
  s.brightness = static_cast<float>(uniform(rng, 0.85, 1.1));
  s.lesion[0] = static_cast<float>(uniform(rng, 0.55, 0.80));
  s.lesion[1] = static_cast<float>(uniform(rng, 0.06, 0.22));
  s.lesion[2] = static_cast<float>(uniform(rng, 0.06, 0.20));
  s.lesion_jitter = static_cast<float>(uniform(rng, 0.02, 0.06));
  s.vessel_rate = static_cast<float>(uniform(rng, 0.5, 2.5));
  s.bubble_rate = static_cast<float>(uniform(rng, 0.0, 2.0));
  return s;
}

std::string synthetic_patient_id(std::size_t patient) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%02zu", patient);
  return buf;
}

ImageSample generate_synthetic_image(std::uint64_t seed, std::size_t patient, std::size_t image, std::size_t side) {
  if (side < 32) throw std::invalid_argument("synthetic image side must be at least 32, got " + std::to_string(side));
  const PatientStyle style = draw_patient_style(seed, patient);
  Rng rng = make_stream({seed, kTagSynthetic, patient, image + 1});
  const double S = static_cast<double>(side);

  ImageSample out;
  out.patient_id = synthetic_patient_id(patient);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s_i%03zu", out.patient_id.c_str(), image);
  out.id = buf;
  out.pixels = RgbImage(side, side);
  BinaryMask mask(side, side);

  // Lesions: redraw the whole set until the foreground cap holds.
  std::vector<Blob> blobs;
  const bool empty = uniform01(rng) < kEmptyProbability;
  const int n_blobs = empty ? 0 : uniform_int(rng, 1, 3);
  for (int attempt = 0;; ++attempt) {
    blobs.clear();
    for (int i = 0; i < n_blobs; ++i) blobs.push_back(draw_blob(rng, style, S));
    std::size_t fg = 0;
    for (std::size_t r = 0; r < side; ++r)
      for (std::size_t c = 0; c < side; ++c)
        for (const auto& b : blobs)
          if (b.margin(r + 0.5, c + 0.5) > 0.0) {
            ++fg;
            break;
          }
    if (static_cast<double>(fg) <= kMaxForeground * S * S || attempt > 64) break;
  }

  std::array<Wave, 3> waves;
  for (auto& w : waves) {
    const double dir = uniform(rng, 0.0, kPi);
    const double freq = style.texture_frequency * uniform(rng, 0.7, 1.4) * 2.0 * kPi / S;
    w = Wave{freq * std::sin(dir), freq * std::cos(dir), uniform(rng, 0.0, 2.0 * kPi),
             style.texture_amplitude * uniform(rng, 0.5, 1.0)};
  }

  // Thin vessels: quadratic Bezier curves in a darker red than the lesions.
  struct Vessel {
    double p[3][2];
    double width;
    float color[3];
  };
  std::vector<Vessel> vessels;
  std::poisson_distribution<int> vessel_count(style.vessel_rate);
  for (int i = vessel_count(rng); i > 0; --i) {
    Vessel v;
    for (auto& p : v.p) {
      p[0] = uniform(rng, 0.0, S);
      p[1] = uniform(rng, 0.0, S);
    }
    v.width = uniform(rng, 0.6, 1.3);
    v.color[0] = clamp01(style.lesion[0] * uniform(rng, 0.75, 0.95));
    v.color[1] = clamp01(style.lesion[1] + uniform(rng, 0.05, 0.15));
    v.color[2] = clamp01(style.lesion[2] + uniform(rng, 0.05, 0.15));
    vessels.push_back(v);
  }

  struct Bubble {
    double cy, cx, radius;
  };
  std::vector<Bubble> bubbles;
  std::poisson_distribution<int> bubble_count(style.bubble_rate);
  for (int i = bubble_count(rng); i > 0; --i) {
    bubbles.push_back({uniform(rng, 0.0, S), uniform(rng, 0.0, S), uniform(rng, 1.5, 0.07 * S)});
  }

  const double lesion_wave_phase = uniform(rng, 0.0, 2.0 * kPi);
  std::normal_distribution<float> pixel_noise(0.0f, kPixelNoise);

  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const double y = r + 0.5, x = c + 0.5;
      double tex = 0.0;
      for (const auto& w : waves) tex += w.amp * std::sin(w.ky * y + w.kx * x + w.phase);
      std::array<double, 3> px;
      for (int ch = 0; ch < 3; ++ch) px[ch] = style.mucosa[ch] * (1.0 + tex);

      for (const auto& v : vessels) {
        // Distance to the curve by sampling its parameter.
        double best = 1e30;
        for (int k = 0; k <= 96; ++k) {
          const double t = k / 96.0, a = (1 - t) * (1 - t), b = 2 * (1 - t) * t, d = t * t;
          const double qy = a * v.p[0][0] + b * v.p[1][0] + d * v.p[2][0];
          const double qx = a * v.p[0][1] + b * v.p[1][1] + d * v.p[2][1];
          best = std::min(best, std::hypot(y - qy, x - qx));
        }
        const double alpha = 0.8 * std::clamp(v.width + 0.5 - best, 0.0, 1.0);
        for (int ch = 0; ch < 3; ++ch) px[ch] = (1 - alpha) * px[ch] + alpha * v.color[ch];
      }

      bool inside = false;
      for (const auto& b : blobs) {
        const double m = b.margin(y, x);
        if (m > 0.0) inside = true;
        // About one pixel of soft edge around the boundary.
        const double radius = 0.5 * (b.rx + b.ry);
        const double alpha = std::clamp(0.5 + m * radius, 0.0, 1.0);
        if (alpha <= 0.0) continue;
        const double shade = 1.0 + 0.08 * std::sin(0.35 * (x + y) + lesion_wave_phase);
        for (int ch = 0; ch < 3; ++ch) px[ch] = (1 - alpha) * px[ch] + alpha * b.color[ch] * shade;
      }

      for (const auto& b : bubbles) {
        const double d = std::hypot(y - b.cy, x - b.cx);
        const double rim = std::exp(-std::pow((d - b.radius) / 0.7, 2.0));
        const double fill = d < b.radius ? 0.15 : 0.0;
        const double alpha = std::min(1.0, 0.7 * rim + fill);
        for (int ch = 0; ch < 3; ++ch) px[ch] = (1 - alpha) * px[ch] + alpha * 0.95;
      }

      const double rr = std::hypot(y - S / 2, x - S / 2) / (S / std::numbers::sqrt2);
      const double light = style.brightness * (1.0 - style.vignette * rr * rr);
      for (int ch = 0; ch < 3; ++ch) {
        // Quantized to 8 bits so a dataset written to PNG reads back unchanged.
        const float v = clamp01(px[ch] * light + pixel_noise(rng));
        out.pixels.at(r, c, ch) = static_cast<float>(std::lround(v * 255.0f)) / 255.0f;
      }
      mask.at(r, c) = inside ? 1 : 0;
    }
  }
  out.mask = std::move(mask);
  return out;
}

std::vector<ImageSample> generate_synthetic(std::uint64_t seed, std::size_t n_patients,
                                            std::size_t images_per_patient, std::size_t side,
                                            std::size_t first_patient) {
  if (side < 32) throw std::invalid_argument("synthetic image side must be at least 32, got " + std::to_string(side));
  std::vector<ImageSample> out(n_patients * images_per_patient);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = generate_synthetic_image(seed, first_patient + i / images_per_patient, i % images_per_patient, side);
  }
  return out;
}

}  // namespace mtseg
