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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mtseg/annotation.hpp"
#include "mtseg/checkpoint.hpp"
#include "mtseg/config.hpp"
#include "mtseg/dataset_io.hpp"
#include "mtseg/experiment.hpp"
#include "mtseg/image_io.hpp"
#include "mtseg/metrics.hpp"
#include "mtseg/synthetic.hpp"
#include "mtseg/trainer.hpp"

namespace fs = std::filesystem;
using namespace mtseg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct SharedFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool force = false;
};

void add_shared(CLI::App* cmd, SharedFlags& f, bool out_required) {
  cmd->add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Random seed");
  auto* out = cmd->add_option("--out", f.out, "Output location");
  if (out_required) out->required();
  cmd->add_flag("--force", f.force, "Replace existing output");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

void prepare_output_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir) && !fs::is_directory(dir)) {
    throw std::invalid_argument("output path '" + dir.string() + "' exists and is not a directory");
  }
  if (fs::is_directory(dir) && !fs::is_empty(dir)) {
    if (!force) throw std::invalid_argument("output directory '" + dir.string() + "' is not empty (use --force)");
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
}

RunConfig load_run_config(const SharedFlags& f) {
  return f.config.empty() ? RunConfig{} : parse_run_config_text(read_text_file(f.config));
}

DatasetSplit load_split(const DataSource& source) {
  std::vector<std::string> warnings;
  DatasetSplit split = load_data(source, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return split;
}

// ---- generate-data ---------------------------------------------------------

struct GenerateFlags {
  std::size_t patients = 7;
  std::size_t val_patients = 2;
  std::size_t images_per_patient = 40;
  std::optional<std::size_t> val_images_per_patient;
  std::size_t side = 64;
};

int cmd_generate(const SharedFlags& f, const GenerateFlags& g) {
  SyntheticSource src;
  if (!f.config.empty()) {
    const auto doc = nlohmann::json::parse(read_text_file(f.config));
    if (doc.contains("data")) {
      const DataSource ds = parse_data_source(doc.at("data"));
      if (const auto* s = std::get_if<SyntheticSource>(&ds)) src = *s;
    }
  }
  if (f.seed) src.seed = *f.seed;
  if (g.val_patients >= g.patients) throw std::invalid_argument("--val-patients must be smaller than --patients");
  src.train_patients = g.patients - g.val_patients;
  src.val_patients = g.val_patients;
  src.images_per_patient = g.images_per_patient;
  src.val_images_per_patient = g.val_images_per_patient.value_or(g.images_per_patient);
  src.side = g.side;
  if (src.side < 32) throw std::invalid_argument("--side must be at least 32");

  const DatasetSplit split = generate_synthetic_split(src);
  write_dataset(f.out, split, to_json(DataSource{src}), f.force);
  std::cout << "wrote " << split.train.size() + split.val.size() << " images (" << src.train_patients
            << " train patients, " << src.val_patients << " val patients) to " << f.out << '\n';
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

struct TrainFlags {
  std::string data;
  std::string mode;
  std::string labels;
  std::optional<std::size_t> iterations;
  bool quiet = false;
};

int cmd_train(const SharedFlags& f, const TrainFlags& t) {
  RunConfig cfg = load_run_config(f);
  if (!t.data.empty()) cfg.data = DirectorySource{t.data};
  if (!t.mode.empty()) cfg.train.mode = parse_mode(t.mode);
  if (!t.labels.empty()) cfg.train.label_budget = parse_budget(t.labels);
  if (t.iterations) cfg.train.total_iterations = *t.iterations;
  if (f.seed) cfg.train.seed = *f.seed;
  cfg.model.validate();
  cfg.train.validate();

  const fs::path out = f.out;
  prepare_output_dir(out, f.force);
  write_text(out / "config.resolved.json", to_json(cfg).dump(2) + "\n");
  const DatasetSplit split = load_split(cfg.data);

  std::ofstream log(out / "train.log");
  TrainCallbacks callbacks;
  const std::size_t every = std::max<std::size_t>(1, cfg.train.total_iterations / 20);
  callbacks.on_step = [&](const LogRow& row) {
    log << format_log_row(row) << '\n';
    if (!t.quiet && (row.iteration % every == 0 || row.iteration + 1 == cfg.train.total_iterations)) {
      std::fprintf(stderr, "iter %zu/%zu epoch %zu lr %.5f w2 %.4f total %.4f\n", row.iteration + 1,
                   cfg.train.total_iterations, row.epoch, row.lr, row.w2, row.loss.total);
    }
  };
  callbacks.on_checkpoint = [&](const Checkpoint& ck) {
    char name[32];
    std::snprintf(name, sizeof name, "iter_%06zu", ck.iteration);
    save_checkpoint(out / "checkpoints" / name, ck);
  };
  const TrainResult result = train(cfg.model, cfg.train, split.train, callbacks);
  save_checkpoint(out / "checkpoint", result.checkpoint);
  if (cfg.train.mode != result.effective_mode) {
    std::cerr << "note: no unlabeled samples remain, trained fully supervised\n";
  }
  std::cout << "checkpoint written to " << (out / "checkpoint").string() << '\n';
  return kExitOk;
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateFlags {
  std::string checkpoint;
  std::string data;
};

int cmd_evaluate(const SharedFlags& f, const EvaluateFlags& e) {
  RunConfig cfg = load_run_config(f);
  if (!e.data.empty()) cfg.data = DirectorySource{e.data};
  const Checkpoint ck = load_checkpoint(e.checkpoint);
  const DatasetSplit split = load_split(cfg.data);
  if (split.val.empty()) throw std::invalid_argument("the data source has no validation samples");
  if (!ck.data_hash.empty() && dataset_hash(split.train) != ck.data_hash) {
    std::cerr << "warning: checkpoint was trained on different data (hash " << ck.data_hash << ")\n";
  }
  const MetricReport report = evaluate(ck, split.val);
  const fs::path out = f.out;
  fs::create_directories(out);
  write_text(out / "metrics.csv", report_csv(report));
  const auto& a = report.aggregate;
  std::printf("dice %.4f  miou %.4f  sensitivity %.4f  precision %.4f  hd %s (%zu images, %zu without HD)\n", a.dice,
              a.miou, a.sensitivity, a.precision, a.hd ? std::to_string(*a.hd).c_str() : "NA", a.images,
              a.hd_excluded);
  return kExitOk;
}

// ---- predict ---------------------------------------------------------------

struct PredictFlags {
  std::string checkpoint;
  std::string input;
  bool overlay = false;
};

RgbImage make_overlay(const RgbImage& image, const BinaryMask& mask) {
  RgbImage out = image;
  const float tint[3] = {0.0f, 1.0f, 0.2f};
  for (std::size_t r = 0; r < image.height; ++r)
    for (std::size_t c = 0; c < image.width; ++c)
      if (mask.at(r, c))
        for (std::size_t ch = 0; ch < 3; ++ch) out.at(r, c, ch) = 0.5f * image.at(r, c, ch) + 0.5f * tint[ch];
  return out;
}

int cmd_predict(const SharedFlags& f, const PredictFlags& p) {
  const Checkpoint ck = load_checkpoint(p.checkpoint);
  std::vector<fs::path> inputs;
  if (fs::is_directory(p.input)) {
    for (const auto& e : fs::directory_iterator(p.input)) {
      if (e.is_regular_file() && e.path().extension() == ".png") inputs.push_back(e.path());
    }
    std::sort(inputs.begin(), inputs.end());
  } else if (fs::is_regular_file(p.input)) {
    inputs.push_back(p.input);
  } else {
    throw std::invalid_argument("input '" + p.input + "' does not exist");
  }
  const fs::path out = f.out;
  fs::create_directories(out);
  const UNet<float> net(ck.model);
  const std::size_t div = ck.model.spatial_divisor();
  for (const auto& path : inputs) {
    const RgbImage image = read_png_rgb(path);
    if (image.height % div != 0 || image.width % div != 0) {
      throw std::invalid_argument(path.string() + ": image size " + std::to_string(image.height) + "x" +
                                  std::to_string(image.width) + " is not divisible by " + std::to_string(div));
    }
    const BinaryMask mask = predict(net, ck.teacher, image);
    const std::string stem = path.stem().string();
    write_png_mask(out / (stem + ".png"), mask);
    if (p.overlay) write_png_rgb(out / (stem + "_overlay.png"), make_overlay(image, mask));
  }
  std::cout << "wrote " << inputs.size() << " mask(s) to " << out.string() << '\n';
  return kExitOk;
}

// ---- experiment ------------------------------------------------------------

struct ExperimentFlags {
  std::string spec;
  bool parallel = false;
  bool save_checkpoints = false;
};

int cmd_experiment(const SharedFlags& f, const ExperimentFlags& x) {
  const std::string spec_path = x.spec.empty() ? f.config : x.spec;
  if (spec_path.empty()) throw std::invalid_argument("an experiment spec is required (--spec or --config)");
  ExperimentSpec spec = parse_experiment_spec_text(read_text_file(spec_path));
  if (f.seed) spec.seeds = {*f.seed};
  if (x.parallel) spec.parallel_cells = true;
  spec.validate();

  const fs::path out = f.out;
  prepare_output_dir(out, f.force);
  const DatasetSplit split = load_split(spec.data);
  ExperimentOptions options;
  options.cell_dir = out / "cells";
  options.save_checkpoints = x.save_checkpoints;
  options.progress = [](const std::string& msg) { std::cerr << msg << '\n'; };
  const ExperimentResult result = run_experiment(spec, split, options);
  write_experiment_outputs(out, spec, result);
  std::cout << summary_markdown(spec.name, summarize(result));
  if (!result.all_ok()) {
    std::cerr << "one or more cells failed, see " << (out / "provenance.json").string() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

// ---- rasterize -------------------------------------------------------------

int cmd_rasterize(const SharedFlags& f, const std::string& annotation) {
  const PolygonAnnotation ann = load_annotation(read_text_file(annotation));
  fs::path out = f.out;
  if (fs::is_directory(out)) out /= (ann.image_id.empty() ? "mask" : ann.image_id) + std::string(".png");
  if (fs::exists(out) && !f.force) throw std::invalid_argument("'" + out.string() + "' exists (use --force)");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  const BinaryMask mask = rasterize_polygons(ann);
  write_png_mask(out, mask);
  std::cout << "wrote " << out.string() << " (" << mask.count() << " foreground pixels)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean Teacher semi-supervised segmentation with an scSE U-Net"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SharedFlags shared;

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate-data", "Write a synthetic dataset with a manifest");
  add_shared(generate, shared, true);
  generate->add_option("--patients", gen.patients, "Total number of patients")->capture_default_str();
  generate->add_option("--val-patients", gen.val_patients, "Patients held out for validation")->capture_default_str();
  generate->add_option("--images-per-patient", gen.images_per_patient, "Images per patient")->capture_default_str();
  generate->add_option("--val-images-per-patient", gen.val_images_per_patient,
                       "Images per validation patient (default: --images-per-patient)");
  generate->add_option("--side", gen.side, "Image side in pixels")->capture_default_str();

  TrainFlags tr;
  auto* train_cmd = app.add_subcommand("train", "Train a student/teacher pair");
  add_shared(train_cmd, shared, true);
  train_cmd->add_option("--data", tr.data, "Dataset directory written by generate-data");
  train_cmd->add_option("--mode", tr.mode, "fully or semi")->check(CLI::IsMember({"fully", "semi"}));
  train_cmd->add_option("--labels", tr.labels, "Label budget: a count or 'all'");
  train_cmd->add_option("--iterations", tr.iterations, "Total iterations");
  train_cmd->add_flag("--quiet", tr.quiet, "No progress output");

  EvaluateFlags ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score the teacher on the validation split");
  add_shared(evaluate_cmd, shared, true);
  evaluate_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint directory")->required();
  evaluate_cmd->add_option("--data", ev.data, "Dataset directory written by generate-data");

  PredictFlags pr;
  auto* predict_cmd = app.add_subcommand("predict", "Write teacher masks for PNG images");
  add_shared(predict_cmd, shared, true);
  predict_cmd->add_option("--checkpoint", pr.checkpoint, "Checkpoint directory")->required();
  predict_cmd->add_option("--input", pr.input, "PNG image or directory of PNG images")->required();
  predict_cmd->add_flag("--overlay", pr.overlay, "Also write <name>_overlay.png");

  ExperimentFlags ex;
  auto* experiment_cmd = app.add_subcommand("experiment", "Run a label-budget × mode × seed matrix");
  add_shared(experiment_cmd, shared, true);
  experiment_cmd->add_option("--spec", ex.spec, "Experiment spec (JSON)")->check(CLI::ExistingFile);
  experiment_cmd->add_flag("--parallel", ex.parallel, "Run cells concurrently");
  experiment_cmd->add_flag("--save-checkpoints", ex.save_checkpoints, "Keep every cell's checkpoint");

  std::string annotation;
  auto* rasterize_cmd = app.add_subcommand("rasterize", "Convert a polygon annotation to a mask PNG");
  add_shared(rasterize_cmd, shared, true);
  rasterize_cmd->add_option("annotation", annotation, "Annotation JSON file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate) return cmd_generate(shared, gen);
    if (*train_cmd) return cmd_train(shared, tr);
    if (*evaluate_cmd) return cmd_evaluate(shared, ev);
    if (*predict_cmd) return cmd_predict(shared, pr);
    if (*experiment_cmd) return cmd_experiment(shared, ex);
    if (*rasterize_cmd) return cmd_rasterize(shared, annotation);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
