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

#include "mtseg/data.hpp"

#include "mtseg/hash.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <stdexcept>

namespace mtseg {

std::string dataset_hash(std::span<const ImageSample> samples) {
  Fnv1a h;
  for (const auto& s : samples) {
    h.update(s.id);
    h.update("\0", 1);
    h.update(s.patient_id);
    h.update("\0", 1);
    const std::uint64_t dims[2] = {s.pixels.height, s.pixels.width};
    h.update(dims, sizeof dims);
    h.update(s.pixels.values.data(), s.pixels.values.size() * sizeof(float));
    const std::uint8_t has_mask = s.mask ? 1 : 0;
    h.update(&has_mask, 1);
    if (s.mask) h.update(s.mask->values.data(), s.mask->values.size());
  }
  return h.hex();
}

void validate_sample(const ImageSample& s) {
  if (s.pixels.values.size() != s.pixels.height * s.pixels.width * 3) {
    throw std::invalid_argument("sample '" + s.id + "': pixel buffer does not match H x W x 3");
  }
  for (float v : s.pixels.values) {
    if (!(v >= 0.0f && v <= 1.0f)) throw std::invalid_argument("sample '" + s.id + "': pixel outside [0,1]");
  }
  if (s.mask) {
    if (s.mask->height != s.pixels.height || s.mask->width != s.pixels.width) {
      throw std::invalid_argument("sample '" + s.id + "': mask shape differs from image shape");
    }
    require_binary(*s.mask);
  }
}

DatasetSplit split_by_patient(std::span<const ImageSample> samples, const std::set<std::string>& val_patients,
                              std::vector<std::string>* warnings) {
  DatasetSplit split;
  std::set<std::string> seen;
  for (const auto& s : samples) {
    if (s.patient_id.empty()) throw std::invalid_argument("sample '" + s.id + "' has no patient id");
    seen.insert(s.patient_id);
    (val_patients.count(s.patient_id) ? split.val : split.train).push_back(s);
  }
  for (const auto& p : val_patients) {
    if (seen.count(p)) continue;
    const std::string msg = "validation patient '" + p + "' has no samples";
    if (warnings) {
      warnings->push_back(msg);
    } else {
      std::cerr << "warning: " << msg << '\n';
    }
  }
  return split;
}

LabelBudget select_label_budget(std::span<const ImageSample> train, std::size_t k, std::uint64_t seed) {
  if (k > train.size()) {
    throw std::invalid_argument("label budget " + std::to_string(k) + " exceeds the " +
                                std::to_string(train.size()) + " training samples");
  }
  for (const auto& s : train) {
    if (!s.mask) throw std::invalid_argument("label budget: sample '" + s.id + "' has no mask");
  }
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_stream({seed, kTagBudget});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> chosen(train.size(), false);
  for (std::size_t i = 0; i < k; ++i) chosen[order[i]] = true;

  LabelBudget out;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (chosen[i]) {
      out.labeled.push_back(train[i]);
    } else {
      out.unlabeled.push_back(train[i]);
      out.unlabeled.back().mask.reset();
    }
  }
  return out;
}

namespace {

// Applies `t` to an H×W grid with `channels` values per cell.
template <typename V>
std::vector<V> transform_grid(const std::vector<V>& in, std::size_t& H, std::size_t& W,
                              std::size_t channels, const GeometricTransform& t) {
  std::vector<V> cur = in;
  std::vector<V> next(in.size());
  auto cell = [channels](std::vector<V>& buf, std::size_t w, std::size_t r, std::size_t c) {
    return buf.begin() + static_cast<std::ptrdiff_t>((r * w + c) * channels);
  };
  if (t.flip_horizontal) {
    for (std::size_t r = 0; r < H; ++r)
      for (std::size_t c = 0; c < W; ++c) std::copy_n(cell(cur, W, r, c), channels, cell(next, W, r, W - 1 - c));
    std::swap(cur, next);
  }
  if (t.flip_vertical) {
    for (std::size_t r = 0; r < H; ++r)
      for (std::size_t c = 0; c < W; ++c) std::copy_n(cell(cur, W, r, c), channels, cell(next, W, H - 1 - r, c));
    std::swap(cur, next);
  }
  const int turns = ((t.quarter_turns % 4) + 4) % 4;
  for (int k = 0; k < turns; ++k) {
    // Counter-clockwise: (r, c) of an H×W grid lands on (W-1-c, r) of a W×H grid.
    for (std::size_t r = 0; r < H; ++r)
      for (std::size_t c = 0; c < W; ++c) std::copy_n(cell(cur, W, r, c), channels, cell(next, H, W - 1 - c, r));
    std::swap(cur, next);
    std::swap(H, W);
  }
  return cur;
}

}  // namespace

GeometricTransform GeometricTransform::draw(Rng& rng) {
  GeometricTransform t;
  t.flip_horizontal = uniform01(rng) < 0.5;
  t.flip_vertical = uniform01(rng) < 0.5;
  t.quarter_turns = uniform_int(rng, 0, 3);
  return t;
}

RgbImage GeometricTransform::apply(const RgbImage& image) const {
  RgbImage out;
  out.height = image.height;
  out.width = image.width;
  out.values = transform_grid(image.values, out.height, out.width, 3, *this);
  return out;
}

BinaryMask GeometricTransform::apply(const BinaryMask& mask) const {
  BinaryMask out;
  out.height = mask.height;
  out.width = mask.width;
  out.values = transform_grid(mask.values, out.height, out.width, 1, *this);
  return out;
}

ImageSample augment(const ImageSample& sample, Rng& rng) {
  const GeometricTransform t = GeometricTransform::draw(rng);
  ImageSample out;
  out.id = sample.id;
  out.patient_id = sample.patient_id;
  out.pixels = t.apply(sample.pixels);
  if (sample.mask) out.mask = t.apply(*sample.mask);
  return out;
}

const char* mode_name(TrainMode mode) { return mode == TrainMode::fully ? "fully" : "semi"; }

TrainMode parse_mode(const std::string& text) {
  if (text == "fully") return TrainMode::fully;
  if (text == "semi") return TrainMode::semi;
  throw std::invalid_argument("unknown training mode '" + text + "' (expected fully or semi)");
}

SamplerState::SamplerState(std::uint64_t seed) : seed_(seed) {
  labeled_.stream = 0;
  labeled_.shuffle = make_stream({seed, kTagSampler, 0});
  unlabeled_.stream = 1;
  unlabeled_.shuffle = make_stream({seed, kTagSampler, 1});
}

SamplerState::Draw SamplerState::next(Cycle& cycle, std::size_t pool_size) {
  if (pool_size == 0) throw std::invalid_argument("cannot sample from an empty pool");
  if (cycle.order.size() != pool_size || cycle.pos >= cycle.order.size()) {
    cycle.order.resize(pool_size);
    std::iota(cycle.order.begin(), cycle.order.end(), 0);
    std::shuffle(cycle.order.begin(), cycle.order.end(), cycle.shuffle);
    cycle.pos = 0;
  }
  return Draw{cycle.order[cycle.pos++], make_stream({seed_, kTagAugment, cycle.stream, cycle.drawn++})};
}

Batch make_batch(std::span<const ImageSample> labeled_pool, std::span<const ImageSample> unlabeled_pool,
                 std::size_t batch_size, TrainMode mode, SamplerState& state) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  std::size_t n_labeled = batch_size;
  std::size_t n_unlabeled = 0;
  if (mode == TrainMode::semi) {
    if (batch_size % 2 != 0) {
      throw std::invalid_argument("semi-supervised batch size must be even, got " + std::to_string(batch_size));
    }
    if (unlabeled_pool.empty()) throw std::invalid_argument("semi-supervised mode needs unlabeled samples");
    n_labeled = n_unlabeled = batch_size / 2;
  }
  if (labeled_pool.empty()) throw std::invalid_argument("no labeled samples to draw from");

  Batch batch;
  batch.labeled.reserve(n_labeled);
  batch.unlabeled.reserve(n_unlabeled);
  for (std::size_t i = 0; i < n_labeled; ++i) {
    auto draw = state.next_labeled(labeled_pool.size());
    const auto& s = labeled_pool[draw.index];
    if (!s.mask) throw std::invalid_argument("labeled sample '" + s.id + "' has no mask");
    const GeometricTransform t = GeometricTransform::draw(draw.augment);
    batch.labeled.push_back(LabeledPair{t.apply(s.pixels), t.apply(*s.mask)});
  }
  for (std::size_t i = 0; i < n_unlabeled; ++i) {
    auto draw = state.next_unlabeled(unlabeled_pool.size());
    batch.unlabeled.push_back(GeometricTransform::draw(draw.augment).apply(unlabeled_pool[draw.index].pixels));
  }
  return batch;
}

}  // namespace mtseg
