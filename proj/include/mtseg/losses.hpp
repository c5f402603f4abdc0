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

// Supervised (cross-entropy + soft Dice), consistency (MSE) and the weighted
// total. Per-image functions take channel-major probabilities (K × pixels)
// and a {0,1} mask of `pixels` entries.

#include <cstddef>
#include <cstdint>
#include <span>

namespace mtseg {

inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kDiceSmoothing = 1e-5;

struct LossWeights {
  double w1 = 0.5;
  double w2 = 0.0;
};

struct LossBreakdown {
  double ce = 0.0;
  double dice = 0.0;
  double consistency = 0.0;
  double total = 0.0;
};

/// Mean over pixels of -log(max(p[mask], 1e-12)).
template <typename T>
double ce_loss(std::span<const T> probs, std::span<const std::uint8_t> mask, std::size_t num_classes);

/// 1 - (2 Σ p·g + ε) / (Σ p + Σ g + ε) on the foreground channel.
template <typename T>
double dice_loss(std::span<const T> probs, std::span<const std::uint8_t> mask, std::size_t num_classes);

/// Mean of squared differences over all class-pixel entries.
template <typename T>
double consistency_loss(std::span<const T> student, std::span<const T> teacher);

/// total = w1·(ce + dice) + w2·consistency. Rejects non-finite components.
LossBreakdown total_loss(double ce, double dice, double consistency, const LossWeights& weights);

// Gradients. Each adds `scale` times the derivative into the output span.

/// Cross-entropy through softmax, directly in logit space: (p - onehot) / pixels.
/// Pixels whose true-class probability sits under the floor contribute nothing.
template <typename T>
void ce_grad_logits(std::span<const T> probs, std::span<const std::uint8_t> mask,
                    std::size_t num_classes, T scale, std::span<T> dlogits);

template <typename T>
void dice_grad_probs(std::span<const T> probs, std::span<const std::uint8_t> mask,
                     std::size_t num_classes, T scale, std::span<T> dprobs);

/// Derivative with respect to the student side; the teacher is a constant.
template <typename T>
void consistency_grad_probs(std::span<const T> student, std::span<const T> teacher, T scale,
                            std::span<T> dprobs);

}  // namespace mtseg
