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
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mtseg/model.hpp"
#include "mtseg/trainer.hpp"

namespace mtseg {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Generated on the fly; val patients are numbered after the train patients.
struct SyntheticSource {
  std::uint64_t seed = 0;
  std::size_t train_patients = 5;
  std::size_t val_patients = 2;
  std::size_t images_per_patient = 40;
  std::size_t val_images_per_patient = 20;
  std::size_t side = 64;

  bool operator==(const SyntheticSource&) const = default;
};

/// A dataset directory written by `mtseg generate-data`.
struct DirectorySource {
  std::filesystem::path path;

  bool operator==(const DirectorySource&) const = default;
};

/// Image PNGs plus either mask PNGs or annotation JSON files sharing the
/// image file stem. The patient id is the stem up to the first separator.
struct ExternalSource {
  std::filesystem::path images;
  std::filesystem::path masks;
  std::filesystem::path annotations;
  std::vector<std::string> val_patients;
  std::string patient_separator = "_";

  bool operator==(const ExternalSource&) const = default;
};

using DataSource = std::variant<SyntheticSource, DirectorySource, ExternalSource>;

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  DataSource data = SyntheticSource{};
};

using LabelBudgetSpec = std::optional<std::size_t>;  // empty: all labels

struct ExperimentSpec {
  std::string name = "experiment";
  std::vector<LabelBudgetSpec> budgets;
  std::vector<TrainMode> modes;
  std::vector<std::uint64_t> seeds;
  ModelConfig model;
  TrainConfig train;
  DataSource data = SyntheticSource{};
  bool parallel_cells = false;

  void validate() const;
};

std::string budget_name(const LabelBudgetSpec& budget);
LabelBudgetSpec parse_budget(const std::string& text);

nlohmann::json to_json(const ModelConfig& config);
nlohmann::json to_json(const TrainConfig& config);
nlohmann::json to_json(const DataSource& source);
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const ExperimentSpec& spec);

/// Parsers start from the defaults, override the keys present and reject
/// unknown keys, listing every one of them with its path.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig parse_run_config_text(const std::string& text);
ExperimentSpec parse_experiment_spec(const nlohmann::json& doc);
ExperimentSpec parse_experiment_spec_text(const std::string& text);

ModelConfig parse_model_config(const nlohmann::json& doc);
TrainConfig parse_train_config(const nlohmann::json& doc);
DataSource parse_data_source(const nlohmann::json& doc);

std::string read_text_file(const std::filesystem::path& path);

/// Hash of the resolved model and training configuration.
std::string config_hash(const ModelConfig& model, const TrainConfig& train);

}  // namespace mtseg
