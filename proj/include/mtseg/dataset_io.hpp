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

#include <filesystem>
#include <string>

#include "json.hpp"
#include "mtseg/config.hpp"
#include "mtseg/data.hpp"

namespace mtseg {

/// Train and val patients drawn from one generator seed.
DatasetSplit generate_synthetic_split(const SyntheticSource& source);

/// Writes DIR/images/<id>.png, DIR/masks/<id>.png and DIR/manifest.json.
/// A non-empty DIR is rejected unless `force` is set, in which case it is
/// replaced.
void write_dataset(const std::filesystem::path& dir, const DatasetSplit& split, const nlohmann::json& generator,
                   bool force);
DatasetSplit read_dataset(const std::filesystem::path& dir);

DatasetSplit load_external(const ExternalSource& source, std::vector<std::string>* warnings = nullptr);

DatasetSplit load_data(const DataSource& source, std::vector<std::string>* warnings = nullptr);

}  // namespace mtseg
