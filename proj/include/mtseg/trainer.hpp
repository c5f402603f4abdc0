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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtseg/checkpoint.hpp"
#include "mtseg/data.hpp"
#include "mtseg/losses.hpp"
#include "mtseg/model.hpp"

namespace mtseg {

struct TrainConfig {
  TrainMode mode = TrainMode::semi;
  std::size_t total_iterations = 3000;
  std::size_t batch_size = 16;
  double base_lr = 0.01;
  double momentum = 0.9;
  double w1 = 0.5;
  std::size_t ramp_up_length = 50;  // epochs
  double ema_beta_rampup = 0.99;
  double ema_beta_main = 0.999;
  NoiseConfig noise;
  bool noise_on_labeled = true;         // perturb the supervised student inputs too
  bool consistency_on_labeled = false;  // add labeled images to the consistency term
  std::uint64_t seed = 0;
  std::optional<std::size_t> label_budget;  // empty: every training label
  std::size_t checkpoint_interval = 0;      // 0: final checkpoint only
  std::optional<double> w2_override;        // replaces the ramp-up weight

  void validate() const;
  std::size_t labeled_per_batch() const { return mode == TrainMode::semi ? batch_size / 2 : batch_size; }
  std::size_t iterations_per_epoch(std::size_t labeled_count) const;

  bool operator==(const TrainConfig&) const = default;
};

double ema_decay(std::size_t epoch, std::size_t length, const TrainConfig& config);

template <typename T>
void ema_update(ParamSet<T>& teacher, const ParamSet<T>& student, double beta);

/// v ← momentum·v + g; p ← p − lr·v. Non-finite gradients abort the step
/// before anything is modified.
template <typename T>
void sgd_step(ParamSet<T>& params, const ParamSet<T>& grads, double lr, double momentum, ParamSet<T>& velocity);

struct TrainState {
  ParamSet<float> student{ParamRole::student};
  ParamSet<float> teacher{ParamRole::teacher};
  ParamSet<float> velocity;
  std::size_t iteration = 0;  // c
  std::size_t epoch = 0;      // E = ⌊c / iterations_per_epoch⌋
  std::size_t iterations_per_epoch = 1;
  SamplerState sampler;
};

TrainState init_train_state(const ModelConfig& model, const TrainConfig& config, std::size_t labeled_count);

struct LogRow {
  std::size_t iteration = 0;  // c before the update
  std::size_t epoch = 0;
  double lr = 0.0;
  double w2 = 0.0;
  double beta = 0.0;
  LossBreakdown loss;
};

/// Tab-separated: iteration epoch lr w2 beta ce dice consistency total.
std::string format_log_row(const LogRow& row);

/// One Mean Teacher update: noisy student passes, teacher targets under
/// independent noise, SGD on the student, EMA into the teacher.
LogRow train_step(const UNet<float>& net, TrainState& state, const Batch& batch, const TrainConfig& config);

struct TrainCallbacks {
  std::function<void(const LogRow&)> on_step;
  std::function<void(const Checkpoint&)> on_checkpoint;  // intermediate checkpoints
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<LogRow> log;
  TrainMode effective_mode = TrainMode::semi;
};

/// Splits the training samples by label budget and runs total_iterations
/// steps. Semi mode with no unlabeled samples runs as fully supervised.
TrainResult train(const ModelConfig& model, const TrainConfig& config, std::span<const ImageSample> train_samples,
                  const TrainCallbacks& callbacks = {},
                  kernels::Backend backend = kernels::Backend::parallel);

Checkpoint make_checkpoint(const ModelConfig& model, const TrainConfig& config, const TrainState& state,
                           const std::string& data_hash);

/// Teacher forward without noise; foreground where its probability is
/// strictly greater than the background probability.
BinaryMask predict(const UNet<float>& net, const ParamSet<float>& params, const RgbImage& image);
BinaryMask predict(const Checkpoint& ckpt, const RgbImage& image);

}  // namespace mtseg
