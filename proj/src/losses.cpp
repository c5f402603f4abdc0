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

#include "mtseg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mtseg {
namespace {

std::size_t pixels_of(std::size_t probs, std::size_t mask, std::size_t num_classes, const char* what) {
  if (num_classes < 2 || probs != mask * num_classes) {
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(probs) +
                                " probabilities do not match " + std::to_string(mask) +
                                " mask pixels x " + std::to_string(num_classes) + " classes");
  }
  return mask;
}

}  // namespace

template <typename T>
double ce_loss(std::span<const T> probs, std::span<const std::uint8_t> mask, std::size_t num_classes) {
  const std::size_t P = pixels_of(probs.size(), mask.size(), num_classes, "ce_loss");
  double sum = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    const double v = static_cast<double>(probs[mask[p] * P + p]);
    sum -= std::log(std::max(v, kProbabilityFloor));
  }
  return sum / static_cast<double>(P);
}

template <typename T>
double dice_loss(std::span<const T> probs, std::span<const std::uint8_t> mask, std::size_t num_classes) {
  const std::size_t P = pixels_of(probs.size(), mask.size(), num_classes, "dice_loss");
  double inter = 0.0, psum = 0.0, gsum = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    const double fg = static_cast<double>(probs[P + p]);
    inter += fg * mask[p];
    psum += fg;
    gsum += mask[p];
  }
  return 1.0 - (2.0 * inter + kDiceSmoothing) / (psum + gsum + kDiceSmoothing);
}

template <typename T>
double consistency_loss(std::span<const T> student, std::span<const T> teacher) {
  if (student.size() != teacher.size() || student.empty()) {
    throw std::invalid_argument("consistency_loss: shape mismatch (" + std::to_string(student.size()) +
                                " vs " + std::to_string(teacher.size()) + ")");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < student.size(); ++i) {
    const double d = static_cast<double>(student[i]) - static_cast<double>(teacher[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(student.size());
}

LossBreakdown total_loss(double ce, double dice, double consistency, const LossWeights& weights) {
  if (!std::isfinite(ce) || !std::isfinite(dice) || !std::isfinite(consistency) ||
      !std::isfinite(weights.w1) || !std::isfinite(weights.w2)) {
    throw std::domain_error("total_loss: non-finite loss component");
  }
  LossBreakdown out;
  out.ce = ce;
  out.dice = dice;
  out.consistency = consistency;
  out.total = weights.w1 * (ce + dice) + weights.w2 * consistency;
  return out;
}

template <typename T>
void ce_grad_logits(std::span<const T> probs, std::span<const std::uint8_t> mask,
                    std::size_t num_classes, T scale, std::span<T> dlogits) {
  const std::size_t P = pixels_of(probs.size(), mask.size(), num_classes, "ce_grad_logits");
  const T s = scale / static_cast<T>(P);
  for (std::size_t p = 0; p < P; ++p) {
    if (static_cast<double>(probs[mask[p] * P + p]) < kProbabilityFloor) continue;
    for (std::size_t k = 0; k < num_classes; ++k) {
      const T target = mask[p] == k ? T{1} : T{0};
      dlogits[k * P + p] += s * (probs[k * P + p] - target);
    }
  }
}

template <typename T>
void dice_grad_probs(std::span<const T> probs, std::span<const std::uint8_t> mask,
                     std::size_t num_classes, T scale, std::span<T> dprobs) {
  const std::size_t P = pixels_of(probs.size(), mask.size(), num_classes, "dice_grad_probs");
  T inter{0}, psum{0}, gsum{0};
  for (std::size_t p = 0; p < P; ++p) {
    inter += probs[P + p] * mask[p];
    psum += probs[P + p];
    gsum += mask[p];
  }
  const T eps = static_cast<T>(kDiceSmoothing);
  const T num = T{2} * inter + eps;
  const T den = psum + gsum + eps;
  // d/dp_j [1 - num/den] = -(2 g_j den - num) / den²
  for (std::size_t p = 0; p < P; ++p) {
    dprobs[P + p] += scale * (num - T{2} * mask[p] * den) / (den * den);
  }
}

template <typename T>
void consistency_grad_probs(std::span<const T> student, std::span<const T> teacher, T scale,
                            std::span<T> dprobs) {
  if (student.size() != teacher.size()) throw std::invalid_argument("consistency_grad: shape mismatch");
  const T s = scale * T{2} / static_cast<T>(student.size());
  for (std::size_t i = 0; i < student.size(); ++i) dprobs[i] += s * (student[i] - teacher[i]);
}

#define MTSEG_INSTANTIATE(T)                                                                       \
  template double ce_loss<T>(std::span<const T>, std::span<const std::uint8_t>, std::size_t);      \
  template double dice_loss<T>(std::span<const T>, std::span<const std::uint8_t>, std::size_t);    \
  template double consistency_loss<T>(std::span<const T>, std::span<const T>);                      \
  template void ce_grad_logits<T>(std::span<const T>, std::span<const std::uint8_t>, std::size_t,  \
                                  T, std::span<T>);                                                \
  template void dice_grad_probs<T>(std::span<const T>, std::span<const std::uint8_t>, std::size_t, \
                                   T, std::span<T>);                                               \
  template void consistency_grad_probs<T>(std::span<const T>, std::span<const T>, T, std::span<T>);

MTSEG_INSTANTIATE(float)
MTSEG_INSTANTIATE(double)
#undef MTSEG_INSTANTIATE

}  // namespace mtseg
