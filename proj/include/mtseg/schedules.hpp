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

namespace mtseg {

/// Polynomial decay base_lr·(1 − c/t)^0.9.
double lr_schedule(std::size_t c, std::size_t t, double base_lr);

/// exp(−5·(1 − E/L)²) while E ≤ L, then 1.
double ramp_up_weight(std::size_t epoch, std::size_t length);

/// `beta_rampup` while E ≤ L (inclusive), `beta_main` afterwards.
double ema_decay(std::size_t epoch, std::size_t length, double beta_rampup, double beta_main);

}  // namespace mtseg
