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
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mtseg/image.hpp"
#include "mtseg/rng.hpp"

namespace mtseg {

struct ImageSample {
  std::string id;
  std::string patient_id;
  RgbImage pixels;
  std::optional<BinaryMask> mask;

  bool operator==(const ImageSample&) const = default;
};

/// Content hash over ids, patients, pixels and masks, in order.
std::string dataset_hash(std::span<const ImageSample> samples);

/// Pixel range, mask range and mask/image shape agreement.
void validate_sample(const ImageSample& sample);

struct DatasetSplit {
  std::vector<ImageSample> train;
  std::vector<ImageSample> val;
};

/// Samples whose patient is in `val_patients` go to val, the rest to train;
/// input order is kept on both sides. Unknown validation patients produce a
/// warning (appended to `warnings` when given, printed to stderr otherwise).
DatasetSplit split_by_patient(std::span<const ImageSample> samples,
                              const std::set<std::string>& val_patients,
                              std::vector<std::string>* warnings = nullptr);

struct LabelBudget {
  std::vector<ImageSample> labeled;
  std::vector<ImageSample> unlabeled;  // masks removed
};

/// Picks k samples uniformly at random (seeded) to keep their masks; the
/// remainder become unlabeled. Both sides keep the input order.
LabelBudget select_label_budget(std::span<const ImageSample> train, std::size_t k, std::uint64_t seed);

/// Flip/rotate transform. Applied as: horizontal flip, vertical flip, then
/// `quarter_turns` counter-clockwise 90° rotations.
struct GeometricTransform {
  bool flip_horizontal = false;
  bool flip_vertical = false;
  int quarter_turns = 0;

  static GeometricTransform draw(Rng& rng);
  bool is_identity() const { return !flip_horizontal && !flip_vertical && quarter_turns % 4 == 0; }

  RgbImage apply(const RgbImage& image) const;
  BinaryMask apply(const BinaryMask& mask) const;
};

/// Random flips (p = 0.5 each) and a k·90° rotation, k uniform in {0..3},
/// applied identically to pixels and mask.
ImageSample augment(const ImageSample& sample, Rng& rng);

enum class TrainMode { fully, semi };

const char* mode_name(TrainMode mode);
TrainMode parse_mode(const std::string& text);

struct LabeledPair {
  RgbImage pixels;
  BinaryMask mask;
};

struct Batch {
  std::vector<LabeledPair> labeled;
  std::vector<RgbImage> unlabeled;
};

/// Epoch-wise sampling without replacement from each pool. The labeled and
/// unlabeled pools use separate shuffle and augmentation streams, so the
/// labeled stream does not depend on the mode. Copying the state and drawing
/// again reproduces the same batch.
class SamplerState {
 public:
  SamplerState() = default;
  explicit SamplerState(std::uint64_t seed);

  struct Draw {
    std::size_t index;
    Rng augment;
  };
  Draw next_labeled(std::size_t pool_size) { return next(labeled_, pool_size); }
  Draw next_unlabeled(std::size_t pool_size) { return next(unlabeled_, pool_size); }

 private:
  struct Cycle {
    std::uint64_t stream = 0;
    Rng shuffle;
    std::vector<std::size_t> order;
    std::size_t pos = 0;
    std::uint64_t drawn = 0;
  };
  Draw next(Cycle& cycle, std::size_t pool_size);

  std::uint64_t seed_ = 0;
  Cycle labeled_;
  Cycle unlabeled_;
};

/// Semi mode: batch_size/2 labeled and batch_size/2 unlabeled samples.
/// Fully mode: batch_size labeled samples. Every sample is augmented.
Batch make_batch(std::span<const ImageSample> labeled_pool, std::span<const ImageSample> unlabeled_pool,
                 std::size_t batch_size, TrainMode mode, SamplerState& state);

}  // namespace mtseg
