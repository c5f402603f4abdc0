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
#include <filesystem>
#include <string>

#include "mtseg/model.hpp"
#include "mtseg/params.hpp"

namespace mtseg {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig model;
  ParamSet<float> student{ParamRole::student};
  ParamSet<float> teacher{ParamRole::teacher};
  std::size_t iteration = 0;
  std::size_t epoch = 0;
  double ema_beta = 0.0;  // decay used by the last update (0 before any step)
  std::string ema_phase;  // "ramp-up" or "main"
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string data_hash;
};

/// Layout:
///   DIR/manifest.json                 version, model config, counters, hashes, array index
///   DIR/student/<name>.bin            little-endian float32, row-major
///   DIR/teacher/<name>.bin
/// The directory is assembled next to the target and renamed into place.
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace mtseg
