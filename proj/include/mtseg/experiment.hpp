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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mtseg/config.hpp"
#include "mtseg/data.hpp"
#include "mtseg/metrics.hpp"
#include "mtseg/trainer.hpp"

namespace mtseg {

inline constexpr const char* kVersion = "0.1.0";

struct CellResult {
  LabelBudgetSpec budget;
  TrainMode mode = TrainMode::semi;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  TrainMode effective_mode = TrainMode::semi;
  MetricReport report;
  std::vector<LogRow> log;
};

struct ExperimentResult {
  std::vector<CellResult> cells;  // budgets × modes × seeds, in spec order
  std::string config_hash;        // over the resolved spec
  std::string data_hash;
  std::string code_version = kVersion;

  bool all_ok() const;
};

struct ExperimentOptions {
  /// When set, each cell writes its log, metrics and (optionally) checkpoint
  /// under DIR/cells/<budget>_<mode>_s<seed>/.
  std::filesystem::path cell_dir;
  bool save_checkpoints = false;
  std::function<void(const std::string&)> progress;
};

std::string cell_name(const LabelBudgetSpec& budget, TrainMode mode, std::uint64_t seed);

/// Runs every (budget, mode, seed) cell. A failing cell is recorded and the
/// remaining cells still run.
ExperimentResult run_experiment(const ExperimentSpec& spec, const DatasetSplit& data,
                                const ExperimentOptions& options = {});

/// Header budget,mode,seed,dice,miou,sensitivity,precision,hd; failed cells
/// carry FAILED in every metric column.
std::string results_csv(const ExperimentResult& result);

struct SummaryRow {
  LabelBudgetSpec budget;
  TrainMode mode = TrainMode::semi;
  std::size_t seeds = 0;  // successful cells
  double dice = 0, dice_std = 0, miou = 0, sensitivity = 0, precision = 0;
  std::optional<double> hd;
};

/// Seed-averaged rows, one per (budget, mode), in spec order.
std::vector<SummaryRow> summarize(const ExperimentResult& result);
std::string summary_markdown(const std::string& name, const std::vector<SummaryRow>& rows);

std::string loss_curve_svg(const ExperimentResult& result);
std::string dice_curve_svg(const std::vector<SummaryRow>& rows);

/// results.csv, summary.md, loss_curves.svg, dice_by_budget.svg,
/// spec.resolved.json and provenance.json in `dir`.
void write_experiment_outputs(const std::filesystem::path& dir, const ExperimentSpec& spec,
                              const ExperimentResult& result);

}  // namespace mtseg
