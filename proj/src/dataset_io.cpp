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

#include "mtseg/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "mtseg/annotation.hpp"
#include "mtseg/image_io.hpp"
#include "mtseg/synthetic.hpp"

namespace mtseg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kDatasetVersion = 1;

void require_directory(const fs::path& dir, const std::string& what) {
  if (!fs::is_directory(dir)) throw std::runtime_error(what + " directory '" + dir.string() + "' does not exist");
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& extension) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

DatasetSplit generate_synthetic_split(const SyntheticSource& s) {
  DatasetSplit split;
  split.train = generate_synthetic(s.seed, s.train_patients, s.images_per_patient, s.side, 0);
  split.val = generate_synthetic(s.seed, s.val_patients, s.val_images_per_patient, s.side, s.train_patients);
  return split;
}

void write_dataset(const fs::path& dir, const DatasetSplit& split, const json& generator, bool force) {
  if (fs::exists(dir) && !fs::is_directory(dir)) {
    throw std::runtime_error("output path '" + dir.string() + "' exists and is not a directory");
  }
  if (fs::is_directory(dir) && !fs::is_empty(dir)) {
    if (!force) throw std::invalid_argument("output directory '" + dir.string() + "' is not empty (use --force)");
    fs::remove_all(dir);
  }
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "masks");

  json samples = json::array();
  std::set<std::string> train_patients, val_patients;
  auto emit = [&](const ImageSample& s, const char* side) {
    validate_sample(s);
    const std::string image = "images/" + s.id + ".png";
    write_png_rgb(dir / image, s.pixels);
    json row{{"id", s.id}, {"patient_id", s.patient_id}, {"split", side}, {"image", image}};
    if (s.mask) {
      const std::string mask = "masks/" + s.id + ".png";
      write_png_mask(dir / mask, *s.mask);
      row["mask"] = mask;
    }
    samples.push_back(row);
  };
  for (const auto& s : split.train) {
    emit(s, "train");
    train_patients.insert(s.patient_id);
  }
  for (const auto& s : split.val) {
    emit(s, "val");
    val_patients.insert(s.patient_id);
  }

  std::vector<ImageSample> all(split.train);
  all.insert(all.end(), split.val.begin(), split.val.end());
  json manifest{{"version", kDatasetVersion},
                {"generator", generator},
                {"train_patients", train_patients},
                {"val_patients", val_patients},
                {"image_count", all.size()},
                {"samples", samples}};
  // Hash of the data as read back, so PNG quantization is accounted for.
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  const DatasetSplit reread = read_dataset(dir);
  std::vector<ImageSample> back(reread.train);
  back.insert(back.end(), reread.val.begin(), reread.val.end());
  manifest["data_hash"] = dataset_hash(back);
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

DatasetSplit read_dataset(const fs::path& dir) {
  require_directory(dir, "dataset");
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("dataset manifest '" + manifest_path.string() + "' is missing");
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("dataset manifest '" + manifest_path.string() + "' is malformed: " + e.what());
  }
  if (manifest.value("version", 0) != kDatasetVersion) {
    throw std::runtime_error("dataset manifest '" + manifest_path.string() + "' has an unsupported version");
  }
  DatasetSplit split;
  for (const auto& row : manifest.at("samples")) {
    ImageSample s;
    s.id = row.at("id").get<std::string>();
    s.patient_id = row.at("patient_id").get<std::string>();
    s.pixels = read_png_rgb(dir / row.at("image").get<std::string>());
    if (row.contains("mask")) s.mask = read_png_mask(dir / row.at("mask").get<std::string>());
    validate_sample(s);
    (row.at("split").get<std::string>() == "val" ? split.val : split.train).push_back(std::move(s));
  }
  return split;
}

DatasetSplit load_external(const ExternalSource& source, std::vector<std::string>* warnings) {
  require_directory(source.images, "image");
  if (!source.masks.empty()) require_directory(source.masks, "mask");
  if (!source.annotations.empty()) require_directory(source.annotations, "annotation");

  std::vector<ImageSample> samples;
  for (const auto& image_path : sorted_files(source.images, ".png")) {
    ImageSample s;
    s.id = image_path.stem().string();
    const auto cut = s.id.find(source.patient_separator);
    s.patient_id = cut == std::string::npos ? s.id : s.id.substr(0, cut);
    s.pixels = read_png_rgb(image_path);
    if (!source.masks.empty()) {
      const fs::path mask_path = source.masks / (s.id + ".png");
      if (!fs::exists(mask_path)) throw std::runtime_error("mask '" + mask_path.string() + "' is missing");
      s.mask = read_png_mask(mask_path);
    } else {
      const fs::path ann_path = source.annotations / (s.id + ".json");
      if (!fs::exists(ann_path)) throw std::runtime_error("annotation '" + ann_path.string() + "' is missing");
      std::ifstream in(ann_path, std::ios::binary);
      const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      PolygonAnnotation ann;
      try {
        ann = load_annotation(text);
      } catch (const std::invalid_argument& e) {
        throw std::runtime_error(ann_path.string() + ": " + e.what());
      }
      if (ann.height != s.pixels.height || ann.width != s.pixels.width) {
        throw std::runtime_error(ann_path.string() + ": annotation size differs from the image size");
      }
      s.mask = rasterize_polygons(ann);
    }
    validate_sample(s);
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw std::runtime_error("no PNG images in '" + source.images.string() + "'");
  const std::set<std::string> val(source.val_patients.begin(), source.val_patients.end());
  return split_by_patient(samples, val, warnings);
}

DatasetSplit load_data(const DataSource& source, std::vector<std::string>* warnings) {
  if (const auto* s = std::get_if<SyntheticSource>(&source)) return generate_synthetic_split(*s);
  if (const auto* d = std::get_if<DirectorySource>(&source)) return read_dataset(d->path);
  return load_external(std::get<ExternalSource>(source), warnings);
}

}  // namespace mtseg
