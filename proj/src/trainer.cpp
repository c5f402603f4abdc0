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

#include "mtseg/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "mtseg/config.hpp"
#include "mtseg/schedules.hpp"

namespace mtseg {

namespace {

Tensor<float> concat_batches(const Tensor<float>& a, const Tensor<float>& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  Shape shape = a.shape();
  shape[0] += b.dim(0);
  Tensor<float> out(shape);
  std::copy(a.data(), a.data() + a.size(), out.data());
  std::copy(b.data(), b.data() + b.size(), out.data() + a.size());
  return out;
}

const char* ema_phase_name(std::size_t epoch, std::size_t length) { return epoch <= length ? "ramp-up" : "main"; }

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("train config: " + what); };
  if (batch_size == 0) fail("batch_size must be positive");
  if (mode == TrainMode::semi && batch_size % 2 != 0) {
    fail("batch_size must be even in semi mode, got " + std::to_string(batch_size));
  }
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) fail("base_lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must lie in [0,1)");
  if (!(w1 >= 0.0 && w1 <= 1.0)) fail("w1 must lie in [0,1]");
  if (ramp_up_length == 0) fail("ramp_up_length must be at least 1");
  if (!(ema_beta_rampup >= 0.0 && ema_beta_rampup < 1.0)) fail("ema_beta_rampup must lie in [0,1)");
  if (!(ema_beta_main >= 0.0 && ema_beta_main < 1.0)) fail("ema_beta_main must lie in [0,1)");
  if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) fail("noise sigma must be non-negative");
  if (w2_override && !(*w2_override >= 0.0 && std::isfinite(*w2_override))) fail("w2_override must be non-negative");
}

std::size_t TrainConfig::iterations_per_epoch(std::size_t labeled_count) const {
  const std::size_t per_batch = labeled_per_batch();
  return std::max<std::size_t>(1, (labeled_count + per_batch - 1) / per_batch);
}

double ema_decay(std::size_t epoch, std::size_t length, const TrainConfig& config) {
  return ema_decay(epoch, length, config.ema_beta_rampup, config.ema_beta_main);
}

template <typename T>
void ema_update(ParamSet<T>& teacher, const ParamSet<T>& student, double beta) {
  if (!teacher.same_layout(student)) throw std::invalid_argument("ema_update: teacher and student layouts differ");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("ema_update: beta must lie in [0,1]");
  const T b = static_cast<T>(beta);
  const T a = static_cast<T>(1.0 - beta);
  for (std::size_t i = 0; i < teacher.size(); ++i) {
    T* t = teacher.entries()[i].value.data();
    const T* s = student.entries()[i].value.data();
    const std::size_t n = teacher.entries()[i].value.size();
    for (std::size_t j = 0; j < n; ++j) t[j] = b * t[j] + a * s[j];
  }
}

template <typename T>
void sgd_step(ParamSet<T>& params, const ParamSet<T>& grads, double lr, double momentum, ParamSet<T>& velocity) {
  if (!params.same_layout(grads)) throw std::invalid_argument("sgd_step: gradient layout differs from parameters");
  if (!params.same_layout(velocity)) throw std::invalid_argument("sgd_step: momentum buffer layout differs");
  for (const auto& e : grads.entries()) {
    for (std::size_t j = 0; j < e.value.size(); ++j) {
      if (!std::isfinite(e.value[j])) throw std::domain_error("sgd_step: non-finite gradient in " + e.name);
    }
  }
  const T m = static_cast<T>(momentum);
  const T step = static_cast<T>(lr);
  for (std::size_t i = 0; i < params.size(); ++i) {
    T* p = params.entries()[i].value.data();
    T* v = velocity.entries()[i].value.data();
    const T* g = grads.entries()[i].value.data();
    const std::size_t n = params.entries()[i].value.size();
    for (std::size_t j = 0; j < n; ++j) {
      v[j] = m * v[j] + g[j];
      p[j] -= step * v[j];
    }
  }
}

TrainState init_train_state(const ModelConfig& model, const TrainConfig& config, std::size_t labeled_count) {
  TrainState st;
  st.student = init_params<float>(model, config.seed);
  st.teacher = clone_params(st.student);
  st.velocity = st.student.zeros_like();
  st.iterations_per_epoch = config.iterations_per_epoch(labeled_count);
  st.sampler = SamplerState(config.seed);
  return st;
}

std::string format_log_row(const LogRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu\t%zu\t%.9g\t%.9g\t%.9g\t%.9g\t%.9g\t%.9g\t%.9g", r.iteration, r.epoch, r.lr,
                r.w2, r.beta, r.loss.ce, r.loss.dice, r.loss.consistency, r.loss.total);
  return buf;
}

LogRow train_step(const UNet<float>& net, TrainState& st, const Batch& batch, const TrainConfig& cfg) {
  if (batch.labeled.empty()) throw std::invalid_argument("train_step: batch has no labeled samples");
  const bool semi = cfg.mode == TrainMode::semi;
  if (semi && batch.unlabeled.empty()) throw std::invalid_argument("train_step: semi mode needs unlabeled samples");
  if (!semi && !batch.unlabeled.empty()) {
    throw std::invalid_argument("train_step: fully supervised batch carries unlabeled samples");
  }

  LogRow row;
  row.iteration = st.iteration;
  row.epoch = st.epoch;
  row.lr = lr_schedule(st.iteration, cfg.total_iterations, cfg.base_lr);
  row.w2 = cfg.w2_override.value_or(ramp_up_weight(st.epoch, cfg.ramp_up_length));
  row.beta = ema_decay(st.epoch, cfg.ramp_up_length, cfg);

  // Independent noise per pass: 0 student labeled, 1 student unlabeled,
  // 2 teacher unlabeled, 3 teacher labeled.
  auto noisy = [&](const Tensor<float>& x, std::uint64_t pass) {
    Rng rng = make_stream({cfg.seed, kTagNoise, st.iteration, pass});
    return inject_noise(x, cfg.noise, rng);
  };

  LossInputs<float> in;
  std::vector<RgbImage> pixels;
  pixels.reserve(batch.labeled.size());
  for (const auto& pair : batch.labeled) {
    pixels.push_back(pair.pixels);
    in.masks.push_back(pair.mask);
  }
  const Tensor<float> labeled = to_tensor<float>(std::span<const RgbImage>(pixels));
  in.labeled_images = cfg.noise_on_labeled ? noisy(labeled, 0) : labeled;
  in.weights = LossWeights{cfg.w1, semi ? row.w2 : 0.0};

  if (semi) {
    const Tensor<float> unlabeled = to_tensor<float>(std::span<const RgbImage>(batch.unlabeled));
    Tensor<float> student_view = noisy(unlabeled, 1);
    Tensor<float> teacher_view = noisy(unlabeled, 2);
    if (cfg.consistency_on_labeled) {
      student_view = concat_batches(in.labeled_images, student_view);
      teacher_view = concat_batches(noisy(labeled, 3), teacher_view);
    }
    // Teacher outputs are constants for the gradient.
    in.teacher_probs = softmax_probs(net.forward(st.teacher, teacher_view));
    in.consistency_images = std::move(student_view);
  }

  LossAndGrad<float> lg = grad_total_loss(net, st.student, in);
  sgd_step(st.student, lg.grads, row.lr, cfg.momentum, st.velocity);
  ema_update(st.teacher, st.student, row.beta);
  ++st.iteration;
  st.epoch = st.iteration / st.iterations_per_epoch;
  row.loss = lg.loss;
  return row;
}

Checkpoint make_checkpoint(const ModelConfig& model, const TrainConfig& config, const TrainState& state,
                           const std::string& data_hash) {
  Checkpoint ck;
  ck.model = model;
  ck.student = state.student;
  ck.teacher = state.teacher;
  ck.iteration = state.iteration;
  ck.epoch = state.epoch;
  if (state.iteration == 0) {
    ck.ema_beta = 0.0;
    ck.ema_phase = ema_phase_name(0, config.ramp_up_length);
  } else {
    const std::size_t last_epoch = (state.iteration - 1) / state.iterations_per_epoch;
    ck.ema_beta = ema_decay(last_epoch, config.ramp_up_length, config);
    ck.ema_phase = ema_phase_name(last_epoch, config.ramp_up_length);
  }
  ck.seed = config.seed;
  ck.config_hash = config_hash(model, config);
  ck.data_hash = data_hash;
  return ck;
}

TrainResult train(const ModelConfig& model, const TrainConfig& config, std::span<const ImageSample> train_samples,
                  const TrainCallbacks& callbacks, kernels::Backend backend) {
  model.validate();
  config.validate();
  if (train_samples.empty()) throw std::invalid_argument("train: no training samples");
  for (const auto& s : train_samples) validate_sample(s);

  const std::size_t k = config.label_budget.value_or(train_samples.size());
  const LabelBudget pools = select_label_budget(train_samples, k, config.seed);
  if (pools.labeled.empty()) throw std::invalid_argument("train: label budget 0 leaves no labeled samples");

  TrainConfig effective = config;
  if (effective.mode == TrainMode::semi && pools.unlabeled.empty()) effective.mode = TrainMode::fully;

  const UNet<float> net(model, backend);
  TrainState st = init_train_state(model, effective, pools.labeled.size());
  const std::string data_hash = dataset_hash(train_samples);

  TrainResult result;
  result.effective_mode = effective.mode;
  result.log.reserve(config.total_iterations);
  while (st.iteration < config.total_iterations) {
    const Batch batch = make_batch(pools.labeled, pools.unlabeled, effective.batch_size, effective.mode, st.sampler);
    result.log.push_back(train_step(net, st, batch, effective));
    if (callbacks.on_step) callbacks.on_step(result.log.back());
    if (callbacks.on_checkpoint && config.checkpoint_interval > 0 && st.iteration % config.checkpoint_interval == 0 &&
        st.iteration < config.total_iterations) {
      callbacks.on_checkpoint(make_checkpoint(model, config, st, data_hash));
    }
  }
  result.checkpoint = make_checkpoint(model, config, st, data_hash);
  return result;
}

BinaryMask predict(const UNet<float>& net, const ParamSet<float>& params, const RgbImage& image) {
  const Tensor<float> probs = softmax_probs(net.forward(params, to_tensor<float>(image)));
  BinaryMask mask(image.height, image.width);
  const std::size_t P = image.height * image.width;
  const float* p = probs.data();
  for (std::size_t i = 0; i < P; ++i) mask.values[i] = p[P + i] > p[i] ? 1 : 0;
  return mask;
}

BinaryMask predict(const Checkpoint& ckpt, const RgbImage& image) {
  const UNet<float> net(ckpt.model);
  return predict(net, ckpt.teacher, image);
}

template void ema_update<float>(ParamSet<float>&, const ParamSet<float>&, double);
template void ema_update<double>(ParamSet<double>&, const ParamSet<double>&, double);
template void sgd_step<float>(ParamSet<float>&, const ParamSet<float>&, double, double, ParamSet<float>&);
template void sgd_step<double>(ParamSet<double>&, const ParamSet<double>&, double, double, ParamSet<double>&);

}  // namespace mtseg
