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
#include <string>
#include <vector>

#include "mtseg/data.hpp"

namespace mtseg {

/// Per-patient appearance, fixed for every image of that patient.
struct PatientStyle {
  float mucosa[3];      // base background color
  float texture_amplitude;
  float texture_frequency;  // cycles per image side
  float vignette;
  float brightness;
  float lesion[3];      // mean lesion color
  float lesion_jitter;  // per-image color spread
  float vessel_rate;    // mean thin red vessels per image
  float bubble_rate;    // mean bright bubbles per image
};

PatientStyle draw_patient_style(std::uint64_t seed, std::size_t patient);

std::string synthetic_patient_id(std::size_t patient);

/// Patients are numbered from `first_patient`; every patient's images depend
/// only on (seed, patient number, image number, side), so splitting a
/// generation across calls gives the same images.
std::vector<ImageSample> generate_synthetic(std::uint64_t seed, std::size_t n_patients,
                                            std::size_t images_per_patient, std::size_t side,
                                            std::size_t first_patient = 0);

ImageSample generate_synthetic_image(std::uint64_t seed, std::size_t patient, std::size_t image,
                                     std::size_t side);

}  // namespace mtseg
