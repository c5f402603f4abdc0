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

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mtseg/attention.hpp"
#include "mtseg/image.hpp"
#include "mtseg/kernels.hpp"
#include "mtseg/losses.hpp"
#include "mtseg/params.hpp"
#include "mtseg/rng.hpp"
#include "mtseg/tensor.hpp"

namespace mtseg {

struct ModelConfig {
  int in_channels = 3;
  int num_classes = 2;
  int depth = 4;          // number of 2× down-sampling steps
  int base_channels = 16; // doubled at every level
  bool attention_enabled = true;
  int cse_reduction = 2;

  std::size_t channels_at(int level) const {
    return static_cast<std::size_t>(base_channels) << level;
  }
  std::size_t spatial_divisor() const { return std::size_t{1} << depth; }
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

struct NoiseConfig {
  double sigma = 0.1;
  bool enabled = true;

  bool operator==(const NoiseConfig&) const = default;
};

template <typename T>
struct ForwardCache;

/// U-Net with optional scSE attention after the convolution pair of every
/// encoder level (bottleneck included) and every decoder level.
///
/// Encoder level i has base·2^i channels: conv3x3+ReLU twice, then scSE, then
/// 2×2 max-pool into level i+1. Decoder level i up-samples level i+1 by
/// nearest neighbour, applies conv3x3+ReLU to base·2^i channels, concatenates
/// the encoder skip (skip first), then conv3x3+ReLU twice and scSE. A final
/// 1×1 convolution emits pre-softmax logits.
template <typename T>
class UNet {
 public:
  explicit UNet(ModelConfig config, kernels::Backend backend = kernels::Backend::parallel);

  const ModelConfig& config() const { return config_; }
  kernels::Backend backend() const { return backend_; }

  /// Zero-valued parameters with every name and shape the network reads.
  ParamSet<T> layout() const;

  /// images: N×in_channels×H×W. Returns N×num_classes×H×W logits.
  Tensor<T> forward(const ParamSet<T>& params, const Tensor<T>& images) const;
  Tensor<T> forward(const ParamSet<T>& params, const Tensor<T>& images, ForwardCache<T>& cache) const;

  /// Gradients of sum(dlogits · logits) with respect to every parameter.
  ParamSet<T> backward(const ParamSet<T>& params, const ForwardCache<T>& cache,
                       const Tensor<T>& dlogits) const;

 private:
  ModelConfig config_;
  kernels::Backend backend_;
};

template <typename T>
struct ForwardCache {
  struct Encoder {
    Tensor<T> conv1, conv2, out;
    ScseCache<T> scse;
    Tensor<T> pooled;
    std::vector<std::uint32_t> argmax;
  };
  struct Decoder {
    Tensor<T> upsampled, up, concat, conv1, conv2, out;
    ScseCache<T> scse;
  };
  Tensor<T> input;
  std::vector<Encoder> encoder;  // depth + 1 levels
  std::vector<Decoder> decoder;  // depth levels, indexed by level
};

/// Fan-in scaled uniform U(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
template <typename T>
ParamSet<T> init_params(const ModelConfig& config, std::uint64_t seed);

/// Per-pixel softmax over the channel axis of N×K×H×W logits.
template <typename T>
Tensor<T> softmax_probs(const Tensor<T>& logits);

/// dlogits += softmax Jacobianᵀ · dprobs, for one image (K × pixels).
template <typename T>
void softmax_backward(std::span<const T> probs, std::span<const T> dprobs, std::size_t num_classes,
                      std::span<T> dlogits);

/// clamp(x + sigma·g, 0, 1) with g i.i.d. standard normal.
template <typename T>
Tensor<T> inject_noise(const Tensor<T>& images, const NoiseConfig& noise, Rng& rng);

/// Stack RGB images (H×W×3) into an N×3×H×W tensor.
template <typename T>
Tensor<T> to_tensor(std::span<const RgbImage> images);
template <typename T>
Tensor<T> to_tensor(const RgbImage& image);

/// Everything the total loss needs besides the parameters. Inputs are the
/// already-noised student inputs; teacher_probs are constants.
template <typename T>
struct LossInputs {
  Tensor<T> labeled_images;             // N_l × C × H × W
  std::vector<BinaryMask> masks;        // N_l
  Tensor<T> consistency_images;         // N_u × C × H × W, may be empty
  Tensor<T> teacher_probs;              // N_u × K × H × W
  LossWeights weights;
};

template <typename T>
struct LossAndGrad {
  LossBreakdown loss;
  ParamSet<T> grads;
};

/// Evaluates L_total = w1·(CE + Dice) + w2·MSE(student, teacher) and its
/// gradient with respect to every parameter. CE and Dice are averaged over
/// labeled images, the consistency term over unlabeled class-pixel entries.
template <typename T>
LossAndGrad<T> grad_total_loss(const UNet<T>& net, const ParamSet<T>& params,
                               const LossInputs<T>& inputs);

/// Loss only (same definition as grad_total_loss).
template <typename T>
LossBreakdown evaluate_total_loss(const UNet<T>& net, const ParamSet<T>& params,
                                  const LossInputs<T>& inputs);

}  // namespace mtseg
