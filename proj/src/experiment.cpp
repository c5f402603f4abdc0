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

#include "mtseg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "mtseg/hash.hpp"
#include "mtseg/plot.hpp"

namespace mtseg {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

void run_cell(const ExperimentSpec& spec, const DatasetSplit& data, const ExperimentOptions& options,
              CellResult& cell) {
  TrainConfig config = spec.train;
  config.mode = cell.mode;
  config.label_budget = cell.budget;
  config.seed = cell.seed;
  TrainResult trained = train(spec.model, config, data.train);
  cell.report = evaluate(trained.checkpoint, data.val);
  cell.effective_mode = trained.effective_mode;
  cell.log = std::move(trained.log);
  if (!options.cell_dir.empty()) {
    const fs::path dir = options.cell_dir / cell_name(cell.budget, cell.mode, cell.seed);
    fs::create_directories(dir);
    std::string log;
    for (const auto& row : cell.log) log += format_log_row(row) + "\n";
    write_file(dir / "train.log", log);
    write_file(dir / "metrics.csv", report_csv(cell.report));
    if (options.save_checkpoints) save_checkpoint(dir / "checkpoint", trained.checkpoint);
  }
}

}  // namespace

bool ExperimentResult::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.ok; });
}

std::string cell_name(const LabelBudgetSpec& budget, TrainMode mode, std::uint64_t seed) {
  return budget_name(budget) + "_" + mode_name(mode) + "_s" + std::to_string(seed);
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const DatasetSplit& data,
                                const ExperimentOptions& options) {
  spec.validate();
  ExperimentResult result;
  {
    Fnv1a h;
    h.update(to_json(spec).dump());
    result.config_hash = h.hex();
  }
  std::vector<ImageSample> all(data.train);
  all.insert(all.end(), data.val.begin(), data.val.end());
  result.data_hash = dataset_hash(all);

  for (const auto& budget : spec.budgets)
    for (auto mode : spec.modes)
      for (auto seed : spec.seeds) {
        CellResult cell;
        cell.budget = budget;
        cell.mode = mode;
        cell.seed = seed;
        result.cells.push_back(std::move(cell));
      }

  const auto n = static_cast<long>(result.cells.size());
#pragma omp parallel for schedule(dynamic, 1) if (spec.parallel_cells)
  for (long i = 0; i < n; ++i) {
    CellResult& cell = result.cells[static_cast<std::size_t>(i)];
    try {
      run_cell(spec, data, options, cell);
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
    if (options.progress) {
      const std::string name = cell_name(cell.budget, cell.mode, cell.seed);
      const std::string msg = cell.ok ? name + ": dice " + fixed4(cell.report.aggregate.dice)
                                      : name + ": FAILED: " + cell.error;
#pragma omp critical(mtseg_progress)
      options.progress(msg);
    }
  }
  return result;
}

std::string results_csv(const ExperimentResult& result) {
  std::string out = "budget,mode,seed,dice,miou,sensitivity,precision,hd\n";
  for (const auto& c : result.cells) {
    out += budget_name(c.budget) + "," + mode_name(c.mode) + "," + std::to_string(c.seed) + ",";
    if (!c.ok) {
      out += "FAILED,FAILED,FAILED,FAILED,FAILED\n";
      continue;
    }
    const auto& a = c.report.aggregate;
    out += fixed(a.dice) + "," + fixed(a.miou) + "," + fixed(a.sensitivity) + "," + fixed(a.precision) + "," +
           (a.hd ? fixed(*a.hd) : std::string("NA")) + "\n";
  }
  return out;
}

std::vector<SummaryRow> summarize(const ExperimentResult& result) {
  std::vector<SummaryRow> rows;
  for (const auto& c : result.cells) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const SummaryRow& r) { return r.budget == c.budget && r.mode == c.mode; });
    if (it == rows.end()) {
      SummaryRow row;
      row.budget = c.budget;
      row.mode = c.mode;
      rows.push_back(row);
    }
  }
  for (auto& row : rows) {
    std::vector<double> dices;
    double hd_sum = 0.0;
    std::size_t hd_n = 0;
    for (const auto& c : result.cells) {
      if (!c.ok || c.budget != row.budget || c.mode != row.mode) continue;
      const auto& a = c.report.aggregate;
      dices.push_back(a.dice);
      row.miou += a.miou;
      row.sensitivity += a.sensitivity;
      row.precision += a.precision;
      if (a.hd) {
        hd_sum += *a.hd;
        ++hd_n;
      }
    }
    row.seeds = dices.size();
    if (dices.empty()) continue;
    const double n = static_cast<double>(dices.size());
    for (double d : dices) row.dice += d;
    row.dice /= n;
    for (double d : dices) row.dice_std += (d - row.dice) * (d - row.dice);
    row.dice_std = dices.size() > 1 ? std::sqrt(row.dice_std / (n - 1.0)) : 0.0;
    row.miou /= n;
    row.sensitivity /= n;
    row.precision /= n;
    if (hd_n > 0) row.hd = hd_sum / static_cast<double>(hd_n);
  }
  return rows;
}

std::string summary_markdown(const std::string& name, const std::vector<SummaryRow>& rows) {
  std::string out = "# " + name + "\n\n";
  out += "| Labels | Mode | Seeds | Dice | Dice std | mIoU | Sensitivity | Precision | HD |\n";
  out += "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out += "| " + budget_name(r.budget) + " | " + mode_name(r.mode) + " | " + std::to_string(r.seeds) + " | ";
    if (r.seeds == 0) {
      out += "FAILED | | | | | |\n";
      continue;
    }
    out += fixed4(r.dice) + " | " + fixed4(r.dice_std) + " | " + fixed4(r.miou) + " | " + fixed4(r.sensitivity) +
           " | " + fixed4(r.precision) + " | " + (r.hd ? fixed4(*r.hd) : std::string("NA")) + " |\n";
  }
  return out;
}

std::string loss_curve_svg(const ExperimentResult& result) {
  LinePlot plot;
  plot.title = "Training loss (seed mean, moving average)";
  plot.x_label = "iteration";
  plot.y_label = "total loss";
  std::vector<std::pair<LabelBudgetSpec, TrainMode>> groups;
  for (const auto& c : result.cells) {
    if (std::find(groups.begin(), groups.end(), std::pair{c.budget, c.mode}) == groups.end()) {
      groups.emplace_back(c.budget, c.mode);
    }
  }
  for (const auto& [budget, mode] : groups) {
    std::vector<double> sum;
    std::size_t runs = 0;
    for (const auto& c : result.cells) {
      if (!c.ok || c.budget != budget || c.mode != mode || c.log.empty()) continue;
      if (sum.empty()) sum.assign(c.log.size(), 0.0);
      for (std::size_t i = 0; i < std::min(sum.size(), c.log.size()); ++i) sum[i] += c.log[i].loss.total;
      ++runs;
    }
    if (runs == 0) continue;
    const std::size_t window = std::max<std::size_t>(1, sum.size() / 50);
    PlotSeries s;
    s.label = budget_name(budget) + " " + mode_name(mode);
    double acc = 0.0;
    for (std::size_t i = 0; i < sum.size(); ++i) {
      acc += sum[i] / static_cast<double>(runs);
      if (i >= window) acc -= sum[i - window] / static_cast<double>(runs);
      if ((i + 1) % window == 0 || i + 1 == sum.size()) {
        s.x.push_back(static_cast<double>(i));
        s.y.push_back(acc / static_cast<double>(std::min(i + 1, window)));
      }
    }
    plot.series.push_back(std::move(s));
  }
  return render_svg(plot);
}

std::string dice_curve_svg(const std::vector<SummaryRow>& rows) {
  LinePlot plot;
  plot.title = "Validation Dice by label budget";
  plot.x_label = "labels";
  plot.y_label = "Dice (seed mean)";
  plot.markers = true;
  std::vector<LabelBudgetSpec> budgets;
  std::vector<TrainMode> modes;
  for (const auto& r : rows) {
    if (std::find(budgets.begin(), budgets.end(), r.budget) == budgets.end()) budgets.push_back(r.budget);
    if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
  }
  for (const auto& b : budgets) plot.x_categories.push_back(budget_name(b));
  for (auto mode : modes) {
    PlotSeries s;
    s.label = mode_name(mode);
    for (std::size_t i = 0; i < budgets.size(); ++i) {
      for (const auto& r : rows) {
        if (r.mode == mode && r.budget == budgets[i] && r.seeds > 0) {
          s.x.push_back(static_cast<double>(i));
          s.y.push_back(r.dice);
        }
      }
    }
    plot.series.push_back(std::move(s));
  }
  return render_svg(plot);
}

void write_experiment_outputs(const fs::path& dir, const ExperimentSpec& spec, const ExperimentResult& result) {
  fs::create_directories(dir);
  const auto rows = summarize(result);
  write_file(dir / "results.csv", results_csv(result));
  write_file(dir / "summary.md", summary_markdown(spec.name, rows));
  write_file(dir / "loss_curves.svg", loss_curve_svg(result));
  write_file(dir / "dice_by_budget.svg", dice_curve_svg(rows));
  write_file(dir / "spec.resolved.json", to_json(spec).dump(2) + "\n");
  nlohmann::json prov{{"config_hash", result.config_hash},
                      {"data_hash", result.data_hash},
                      {"code_version", result.code_version}};
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& c : result.cells) {
    if (!c.ok) failures.push_back({{"cell", cell_name(c.budget, c.mode, c.seed)}, {"error", c.error}});
  }
  prov["failed_cells"] = failures;
  write_file(dir / "provenance.json", prov.dump(2) + "\n");
}

}  // namespace mtseg
