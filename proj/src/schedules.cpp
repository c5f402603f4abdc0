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

#include "mtseg/schedules.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mtseg {

double lr_schedule(std::size_t c, std::size_t t, double base_lr) {
  if (t == 0) throw std::invalid_argument("lr_schedule: total iterations must be positive");
  if (c > t) {
    throw std::invalid_argument("lr_schedule: iteration " + std::to_string(c) + " exceeds total " +
                                std::to_string(t));
  }
  if (c == t) return 0.0;
  return base_lr * std::pow(1.0 - static_cast<double>(c) / static_cast<double>(t), 0.9);
}

double ramp_up_weight(std::size_t epoch, std::size_t length) {
  if (length == 0) throw std::invalid_argument("ramp_up_weight: ramp-up length must be at least 1");
  if (epoch >= length) return 1.0;
  const double phase = 1.0 - static_cast<double>(epoch) / static_cast<double>(length);
  return std::exp(-5.0 * phase * phase);
}

double ema_decay(std::size_t epoch, std::size_t length, double beta_rampup, double beta_main) {
  return epoch <= length ? beta_rampup : beta_main;
}

}  // namespace mtseg
