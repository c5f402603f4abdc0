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


// Acceptance run. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Experiment reports are written under
// MTSEG_ACCEPTANCE_OUT (default: acceptance_out in the working directory).
//
//   1  formula examples
//   2  gradient against central finite differences
//   3  rasterization and Hausdorff against brute-force oracles
//   4  Mean Teacher invariants
//   5  label efficiency at k = 25
//   6  attention non-inferiority with all labels
//   7  learnability floor
//   8  byte-identical results across repeated runs

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mtseg/annotation.hpp"
#include "mtseg/config.hpp"
#include "mtseg/dataset_io.hpp"
#include "mtseg/experiment.hpp"
#include "mtseg/losses.hpp"
#include "mtseg/metrics.hpp"
#include "mtseg/model.hpp"
#include "mtseg/rng.hpp"
#include "mtseg/schedules.hpp"
#include "mtseg/synthetic.hpp"
#include "mtseg/trainer.hpp"

using namespace mtseg;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Collects failed checks for one criterion.
class Checker {
 public:
  void check(bool ok, const std::string& what) {
    ++total_;
    if (!ok) failures_.push_back(what);
  }
  void close(double actual, double expected, double tol, const std::string& what) {
    const double scale = std::max(1.0, std::abs(expected));
    std::ostringstream s;
    s.precision(12);
    s << what << ": got " << actual << ", expected " << expected;
    check(std::abs(actual - expected) <= tol * scale, s.str());
  }
  bool ok() const { return failures_.empty(); }
  std::string summary() const {
    std::ostringstream s;
    s << (total_ - failures_.size()) << "/" << total_ << " checks";
    for (std::size_t i = 0; i < failures_.size() && i < 5; ++i) s << "; " << failures_[i];
    return s.str();
  }

 private:
  std::size_t total_ = 0;
  std::vector<std::string> failures_;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path out_dir() {
  const char* env = std::getenv("MTSEG_ACCEPTANCE_OUT");
  return env != nullptr ? fs::path(env) : fs::path("acceptance_out");
}

BinaryMask mask_from(std::size_t h, std::size_t w, std::initializer_list<int> values) {
  BinaryMask m(h, w);
  std::size_t i = 0;
  for (int v : values) m.values[i++] = static_cast<std::uint8_t>(v);
  return m;
}

BinaryMask mask_with(std::size_t h, std::size_t w, std::initializer_list<std::pair<int, int>> points) {
  BinaryMask m(h, w);
  for (auto [r, c] : points) m.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = 1;
  return m;
}

ParamSet<double> scalar_params(double v) {
  ParamSet<double> p;
  p.add("w", {1})[0] = v;
  return p;
}

// ---------------------------------------------------------------- 1

Outcome formula_examples() {
  const auto start = Clock::now();
  Checker c;
  const double tol = 1e-6;

  c.close(lr_schedule(0, 3000, 0.01), 0.01, tol, "lr c=0");
  c.close(lr_schedule(3000, 3000, 0.01), 0.0, tol, "lr c=t");
  c.close(lr_schedule(1500, 3000, 0.01), 0.01 * std::pow(0.5, 0.9), tol, "lr c=t/2");

  c.close(ramp_up_weight(50, 50), 1.0, tol, "ramp E=L");
  c.close(ramp_up_weight(80, 50), 1.0, tol, "ramp E>L");
  c.close(ramp_up_weight(0, 50), std::exp(-5.0), tol, "ramp E=0");

  TrainConfig tc;
  c.close(ema_decay(10, 50, tc), 0.99, tol, "beta E=10");
  c.close(ema_decay(51, 50, tc), 0.999, tol, "beta E=51");
  c.close(ema_decay(50, 50, tc), 0.99, tol, "beta E=L");

  {
    auto teacher = scalar_params(1.0);
    ema_update(teacher, scalar_params(0.0), 0.99);
    c.close(teacher.get("w")[0], 0.99, tol, "ema scalar");
    teacher = scalar_params(0.3);
    ema_update(teacher, scalar_params(0.7), 0.0);
    c.close(teacher.get("w")[0], 0.7, tol, "ema beta=0");
    teacher = scalar_params(0.3);
    ema_update(teacher, scalar_params(0.7), 1.0);
    c.close(teacher.get("w")[0], 0.3, tol, "ema beta=1");
  }

  {
    const std::vector<std::uint8_t> g{1, 0, 1, 1};
    std::vector<double> onehot(8, 0.0), wrong(8, 0.0), uniform_p(8, 0.5);
    for (std::size_t i = 0; i < 4; ++i) {
      onehot[g[i] * 4 + i] = 1.0;
      wrong[(1 - g[i]) * 4 + i] = 1.0;
    }
    c.check(ce_loss<double>(onehot, g, 2) <= 1e-11, "ce one-hot correct");
    c.close(ce_loss<double>(uniform_p, g, 2), std::log(2.0), tol, "ce uniform");
    c.close(ce_loss<double>(wrong, g, 2), -std::log(1e-12), tol, "ce one-hot wrong");
    c.check(dice_loss<double>(onehot, g, 2) <= 1e-5, "dice perfect");
  }
  {
    const double eps = kDiceSmoothing;
    const std::vector<double> p{0.0, 1.0, 1.0, 0.0};  // background row, foreground row
    const std::vector<std::uint8_t> g{0, 1};
    c.close(dice_loss<double>(p, g, 2), 1.0 - eps / (2.0 + eps), tol, "dice disjoint");
    const std::vector<double> half{0.5, 0.5, 0.5, 0.5};
    const std::vector<std::uint8_t> g10{1, 0};
    c.close(dice_loss<double>(half, g10, 2), 0.5, 1e-5, "dice half");
  }
  {
    const std::vector<double> a{1.0, 0.0}, b{0.0, 1.0};
    c.close(consistency_loss<double>(a, a), 0.0, tol, "mse identical");
    c.close(consistency_loss<double>(a, b), 1.0, tol, "mse opposite");
    const std::vector<double> x{0.2, 0.8, 0.6, 0.4}, y{0.9, 0.1, 0.3, 0.7};
    c.check(consistency_loss<double>(x, y) == consistency_loss<double>(y, x), "mse symmetric");
  }
  {
    c.close(total_loss(0.3, 0.4, 9.0, {0.5, 0.0}).total, 0.35, tol, "total w2=0");
    c.close(total_loss(0.4, 0.6, 0.2, {0.5, 1.0}).total, 0.7, tol, "total arithmetic");
    c.close(total_loss(0.0, 0.0, 0.0, {0.5, 1.0}).total, 0.0, tol, "total zeros");
  }

  {
    const auto ones = BinaryMask(2, 2, 1), zeros = BinaryMask(2, 2, 0);
    const Confusion perfect = confusion(ones, ones);
    c.check(perfect == Confusion{4, 0, 0, 0}, "confusion perfect");
    c.check(confusion(ones, zeros) == Confusion{0, 4, 0, 0}, "confusion all fp");
    const Confusion mixed = confusion(mask_from(1, 4, {1, 1, 0, 0}), mask_from(1, 4, {1, 0, 1, 0}));
    c.check(mixed == Confusion{1, 1, 1, 1}, "confusion mixed");

    c.close(dice_score(perfect), 1.0, tol, "dice perfect");
    c.close(dice_score(confusion(mask_from(1, 4, {1, 1, 0, 0}), mask_from(1, 4, {0, 0, 1, 1}))), 0.0, tol,
            "dice disjoint");
    c.close(dice_score(Confusion{3, 1, 3, 0}), 0.6, tol, "dice tp=3");

    const Confusion both = confusion(mask_from(1, 4, {1, 0, 1, 0}), mask_from(1, 4, {1, 0, 1, 0}));
    c.close(miou(both), 1.0, tol, "miou perfect");
    c.close(iou_foreground(mixed), 1.0 / 3.0, tol, "iou fg");
    c.close(iou_background(mixed), 1.0 / 3.0, tol, "iou bg");
    c.close(miou(mixed), 1.0 / 3.0, tol, "miou mixed");
    c.close(miou(confusion(zeros, zeros)), 1.0, tol, "miou empty");

    c.close(sensitivity(confusion(mask_from(1, 4, {1, 1, 1, 0}), mask_from(1, 4, {1, 1, 0, 0}))), 1.0, tol,
            "sensitivity superset");
    c.close(precision(confusion(mask_from(1, 4, {1, 0, 0, 0}), mask_from(1, 4, {1, 1, 0, 0}))), 1.0, tol,
            "precision subset");
    c.close(sensitivity(Confusion{1, 1, 1, 0}), 0.5, tol, "sensitivity arithmetic");
    c.close(precision(Confusion{1, 1, 1, 0}), 0.5, tol, "precision arithmetic");

    const auto blob = mask_with(5, 5, {{1, 1}, {2, 3}});
    const auto hd_same = hausdorff(blob, blob);
    c.check(hd_same.has_value() && *hd_same == 0.0, "hd identical");
    const auto hd5 = hausdorff(mask_with(5, 5, {{0, 0}}), mask_with(5, 5, {{3, 4}}));
    c.check(hd5.has_value(), "hd 3-4-5 defined");
    if (hd5) c.close(*hd5, 5.0, 1e-9, "hd 3-4-5");
    const auto hd2 = hausdorff(mask_with(5, 5, {{0, 0}}), mask_with(5, 5, {{0, 0}, {0, 2}}));
    c.check(hd2.has_value(), "hd asymmetric defined");
    if (hd2) c.close(*hd2, 2.0, 1e-9, "hd asymmetric");
  }

  {
    // Single image, perfect prediction.
    ImageSample s;
    s.id = "one";
    s.patient_id = "p";
    s.pixels = RgbImage(4, 4);
    s.mask = mask_with(4, 4, {{1, 1}, {1, 2}});
    const std::vector<BinaryMask> preds{*s.mask};
    const std::vector<ImageSample> val{s};
    const MetricReport r = evaluate_predictions(preds, val);
    c.close(r.aggregate.dice, 1.0, tol, "evaluate perfect dice");
    c.check(r.aggregate.hd.has_value() && *r.aggregate.hd == 0.0, "evaluate perfect hd");
  }

  const double elapsed = seconds_since(start);
  c.check(elapsed < 10.0, "runtime under 10 s");
  std::ostringstream d;
  d << c.summary() << ", " << elapsed << " s";
  return {c.ok(), d.str()};
}

// ---------------------------------------------------------------- 2

// Sign of every ReLU and every pooling switch; the loss is smooth between
// parameter points that share this pattern.
std::vector<std::uint32_t> activation_pattern(const UNet<double>& net, const ParamSet<double>& p,
                                              const LossInputs<double>& in) {
  std::vector<std::uint32_t> out;
  auto signs = [&out](const auto& values) {
    for (double v : values) out.push_back(v > 0.0 ? 1u : 0u);
  };
  for (const auto* images : {&in.labeled_images, &in.consistency_images}) {
    ForwardCache<double> cache;
    net.forward(p, *images, cache);
    for (const auto& e : cache.encoder) {
      signs(e.conv1.span());
      signs(e.conv2.span());
      signs(e.scse.hidden);
      out.insert(out.end(), e.argmax.begin(), e.argmax.end());
    }
    for (const auto& d : cache.decoder) {
      signs(d.up.span());
      signs(d.conv1.span());
      signs(d.conv2.span());
      signs(d.scse.hidden);
    }
  }
  return out;
}

Outcome gradient_oracle() {
  const auto start = Clock::now();
  ModelConfig cfg;
  cfg.depth = 2;
  cfg.base_channels = 4;
  const UNet<double> net(cfg, kernels::Backend::reference);
  auto params = init_params<double>(cfg, 21);
  Rng rng = make_stream({20});
  for (auto& e : params.entries()) {
    if (e.value.rank() == 1) {
      for (auto& v : e.value.span()) v = uniform(rng, -0.1, 0.1);
    }
  }
  auto random_tensor = [&rng](Shape shape, double lo, double hi) {
    Tensor<double> t(std::move(shape));
    for (auto& x : t.span()) x = uniform(rng, lo, hi);
    return t;
  };
  auto random_mask = [&rng] {
    BinaryMask m(8, 8);
    for (auto& v : m.values) v = uniform01(rng) < 0.4 ? 1 : 0;
    return m;
  };
  LossInputs<double> in;
  in.labeled_images = random_tensor({2, 3, 8, 8}, 0.0, 1.0);
  in.masks = {random_mask(), random_mask()};
  in.consistency_images = random_tensor({2, 3, 8, 8}, 0.0, 1.0);
  in.teacher_probs = softmax_probs(random_tensor({2, 2, 8, 8}, -2.0, 2.0));
  in.weights = {0.5, 0.7};

  const auto analytic = grad_total_loss(net, params, in);
  const auto base_pattern = activation_pattern(net, params, in);
  auto probe = params;
  const double h = 1e-4;
  std::size_t checked = 0, skipped = 0;
  double worst = 0.0;
  std::string worst_name;
  for (std::size_t e = 0; e < probe.entries().size(); ++e) {
    auto& value = probe.entries()[e].value;
    const auto& g = analytic.grads.entries()[e].value;
    double diff = 0.0, norm_a = 0.0, norm_f = 0.0;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + h;
      const double up = evaluate_total_loss(net, probe, in).total;
      const bool smooth_up = activation_pattern(net, probe, in) == base_pattern;
      value[i] = saved - h;
      const double down = evaluate_total_loss(net, probe, in).total;
      const bool smooth_down = activation_pattern(net, probe, in) == base_pattern;
      value[i] = saved;
      if (!smooth_up || !smooth_down) {
        ++skipped;
        continue;
      }
      ++checked;
      const double fd = (up - down) / (2.0 * h);
      diff += (fd - g[i]) * (fd - g[i]);
      norm_a += g[i] * g[i];
      norm_f += fd * fd;
    }
    const double rel = std::sqrt(diff) / std::max(std::sqrt(std::max(norm_a, norm_f)), 1e-7);
    if (rel > worst) {
      worst = rel;
      worst_name = probe.entries()[e].name;
    }
  }
  const double elapsed = seconds_since(start);
  const bool pass = worst < 1e-4 && skipped * 50 < checked + skipped && elapsed < 300.0;
  std::ostringstream d;
  d << probe.entries().size() << " arrays, worst relative error " << worst << " (" << worst_name << "), "
    << checked << " elements checked, " << skipped << " skipped at ReLU/pool switches, " << elapsed << " s";
  return {pass, d.str()};
}

// ---------------------------------------------------------------- 3

bool point_in_polygon(const std::vector<PolygonShape::Point>& poly, double x, double y) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const double xi = poly[i].x, yi = poly[i].y, xj = poly[j].x, yj = poly[j].y;
    if (((yi > y) != (yj > y)) && (x < (xj - xi) * (y - yi) / (yj - yi) + xi)) inside = !inside;
  }
  return inside;
}

double brute_hausdorff(const BinaryMask& a, const BinaryMask& b) {
  auto directed = [](const BinaryMask& from, const BinaryMask& to) {
    double worst = 0.0;
    for (std::size_t r = 0; r < from.height; ++r) {
      for (std::size_t c = 0; c < from.width; ++c) {
        if (!from.at(r, c)) continue;
        double best = INFINITY;
        for (std::size_t r2 = 0; r2 < to.height; ++r2) {
          for (std::size_t c2 = 0; c2 < to.width; ++c2) {
            if (!to.at(r2, c2)) continue;
            const double dr = double(r) - double(r2), dc = double(c) - double(c2);
            best = std::min(best, std::sqrt(dr * dr + dc * dc));
          }
        }
        worst = std::max(worst, best);
      }
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

Outcome oracle_equivalence() {
  Rng rng = make_stream({3, 1});
  std::size_t raster_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    PolygonAnnotation ann{"r", 16, 16, {}};
    PolygonShape shape{"lesion", {}};
    const int n = uniform_int(rng, 3, 10);
    for (int i = 0; i < n; ++i) shape.points.push_back({uniform(rng, 0, 16), uniform(rng, 0, 16)});
    ann.shapes.push_back(shape);
    BinaryMask oracle(16, 16);
    for (std::size_t r = 0; r < 16; ++r) {
      for (std::size_t c = 0; c < 16; ++c) oracle.at(r, c) = point_in_polygon(shape.points, c + 0.5, r + 0.5);
    }
    if (rasterize_polygons(ann) == oracle) ++raster_ok;
  }

  std::size_t hd_ok = 0, hd_pairs = 0;
  while (hd_pairs < 100) {
    const double da = uniform(rng, 0.02, 0.5), db = uniform(rng, 0.02, 0.5);
    BinaryMask a(16, 16), b(16, 16);
    for (auto& v : a.values) v = uniform01(rng) < da;
    for (auto& v : b.values) v = uniform01(rng) < db;
    if (a.count() == 0 || b.count() == 0) continue;
    ++hd_pairs;
    const auto hd = hausdorff(a, b);
    if (hd && *hd == brute_hausdorff(a, b)) ++hd_ok;
  }
  std::ostringstream d;
  d << "rasterization " << raster_ok << "/100 exact, hausdorff " << hd_ok << "/100 exact";
  return {raster_ok == 100 && hd_ok == 100, d.str()};
}

// ---------------------------------------------------------------- 4

Outcome mean_teacher_invariants() {
  Checker c;
  {
    // Teacher after n updates equals the closed-form weighted average.
    Rng rng = make_stream({4, 1});
    const double t0 = 0.37;
    auto teacher = scalar_params(t0);
    std::vector<double> students, betas;
    for (int i = 0; i < 200; ++i) {
      students.push_back(uniform(rng, -1, 1));
      betas.push_back(i < 100 ? 0.99 : 0.999);
      ema_update(teacher, scalar_params(students.back()), betas.back());
    }
    double expected = t0;
    for (double b : betas) expected *= b;
    for (std::size_t i = 0; i < students.size(); ++i) {
      double w = 1.0 - betas[i];
      for (std::size_t j = i + 1; j < betas.size(); ++j) w *= betas[j];
      expected += w * students[i];
    }
    c.check(std::abs(teacher.get("w")[0] - expected) <= 1e-10, "closed-form EMA");
  }
  {
    ModelConfig model;
    model.depth = 2;
    model.base_channels = 4;
    const auto data = generate_synthetic(5, 2, 12, 32);
    TrainConfig semi;
    semi.mode = TrainMode::semi;
    semi.batch_size = 8;
    semi.total_iterations = 50;
    semi.label_budget = 6;
    semi.noise.enabled = false;
    semi.w2_override = 0.0;
    semi.seed = 3;
    semi.checkpoint_interval = 1;
    TrainConfig fully = semi;
    fully.mode = TrainMode::fully;
    fully.batch_size = 4;
    fully.w2_override.reset();

    std::vector<ParamSet<float>> semi_path, fully_path;
    TrainCallbacks cb_semi, cb_fully;
    cb_semi.on_checkpoint = [&](const Checkpoint& ck) { semi_path.push_back(ck.student); };
    cb_fully.on_checkpoint = [&](const Checkpoint& ck) { fully_path.push_back(ck.student); };
    const auto rs = train(model, semi, data, cb_semi);
    const auto rf = train(model, fully, data, cb_fully);
    semi_path.push_back(rs.checkpoint.student);
    fully_path.push_back(rf.checkpoint.student);
    c.check(rs.effective_mode == TrainMode::semi, "semi run keeps an unlabeled pool");
    c.check(semi_path.size() == 50 && fully_path.size() == 50, "50 recorded steps");
    std::size_t equal = 0;
    for (std::size_t i = 0; i < std::min(semi_path.size(), fully_path.size()); ++i) {
      equal += semi_path[i].same_values(fully_path[i]) ? 1 : 0;
    }
    c.check(equal == 50, "bit-identical trajectory (" + std::to_string(equal) + "/50 steps)");
    c.check(rs.checkpoint.teacher.same_values(rf.checkpoint.teacher), "identical teachers");
  }
  return {c.ok(), c.summary()};
}

// ---------------------------------------------------------------- 5-8

// All trend criteria use the default synthetic task and the same reduced
// model width; see the README for the runtime trade-off.
constexpr int kTrendBaseChannels = 8;
constexpr std::size_t kTrendIterations = 1000;

ExperimentSpec trend_spec(const std::string& name) {
  ExperimentSpec spec;
  spec.name = name;
  spec.seeds = {0, 1, 2};
  spec.model.base_channels = kTrendBaseChannels;
  spec.train.total_iterations = kTrendIterations;
  spec.data = SyntheticSource{};
  return spec;
}

ExperimentResult run_and_save(const ExperimentSpec& spec, const DatasetSplit& data) {
  ExperimentOptions options;
  options.progress = [](const std::string& line) { std::cerr << "  " << line << "\n"; };
  const auto start = Clock::now();
  auto result = run_experiment(spec, data, options);
  std::cerr << "  " << spec.name << " finished in " << seconds_since(start) << " s\n";
  write_experiment_outputs(out_dir() / spec.name, spec, result);
  return result;
}

double mean_dice(const ExperimentResult& r, TrainMode mode, std::ostringstream& detail) {
  double sum = 0.0;
  std::size_t n = 0;
  detail << mode_name(mode) << " [";
  for (const auto& cell : r.cells) {
    if (cell.mode != mode) continue;
    if (n > 0) detail << ", ";
    if (cell.ok) {
      detail << cell.report.aggregate.dice;
      sum += cell.report.aggregate.dice;
    } else {
      detail << "FAILED";
      sum += NAN;
    }
    ++n;
  }
  const double mean = n > 0 ? sum / static_cast<double>(n) : NAN;
  detail << "] mean " << mean;
  return mean;
}

Outcome label_efficiency(const DatasetSplit& data) {
  auto spec = trend_spec("label_efficiency_k25");
  spec.budgets = {std::size_t{25}};
  spec.modes = {TrainMode::fully, TrainMode::semi};
  const auto r = run_and_save(spec, data);
  std::ostringstream d;
  d.precision(4);
  const double fully = mean_dice(r, TrainMode::fully, d);
  d << "; ";
  const double semi = mean_dice(r, TrainMode::semi, d);
  d << "; gap " << semi - fully << " (need >= 0.02)";
  return {semi >= fully + 0.02, d.str()};
}

struct AblationResult {
  Outcome attention;
  Outcome learnability;
};

AblationResult attention_ablation(const DatasetSplit& data) {
  auto on = trend_spec("attention_on_all");
  on.budgets = {std::nullopt};
  on.modes = {TrainMode::fully};
  auto off = on;
  off.name = "attention_off_all";
  off.model.attention_enabled = false;
  const auto r_on = run_and_save(on, data);
  const auto r_off = run_and_save(off, data);

  AblationResult out;
  std::ostringstream d;
  d.precision(4);
  d << "on: ";
  const double mean_on = mean_dice(r_on, TrainMode::fully, d);
  d << "; off: ";
  const double mean_off = mean_dice(r_off, TrainMode::fully, d);
  d << "; gap " << mean_on - mean_off << " (need >= -0.01)";
  out.attention = {mean_on >= mean_off - 0.01, d.str()};

  const auto& first = r_on.cells.front();
  std::ostringstream l;
  l.precision(4);
  if (first.ok) {
    l << "fully, all labels, seed " << first.seed << ", " << kTrendIterations
      << " iterations: dice " << first.report.aggregate.dice << " (need >= 0.85)";
    out.learnability = {first.report.aggregate.dice >= 0.85, l.str()};
  } else {
    out.learnability = {false, "training failed: " + first.error};
  }
  return out;
}

Outcome determinism() {
  ExperimentSpec spec;
  spec.name = "determinism";
  spec.budgets = {std::size_t{10}, std::nullopt};
  spec.modes = {TrainMode::fully, TrainMode::semi};
  spec.seeds = {0, 1};
  spec.model.depth = 3;
  spec.model.base_channels = 4;
  spec.train.total_iterations = 20;
  spec.train.batch_size = 8;
  SyntheticSource src;
  src.train_patients = 3;
  src.val_patients = 1;
  src.images_per_patient = 8;
  src.val_images_per_patient = 6;
  src.side = 32;
  spec.data = src;
  const auto data = load_data(spec.data);
  const std::string a = results_csv(run_experiment(spec, data));
  spec.parallel_cells = true;
  const std::string b = results_csv(run_experiment(spec, data));
  std::ostringstream d;
  d << "two runs of a " << spec.budgets.size() * spec.modes.size() * spec.seeds.size() << "-cell spec, "
    << a.size() << " CSV bytes, " << (a == b ? "identical" : "different");
  return {a == b && a.find("FAILED") == std::string::npos, d.str()};
}

void report(int id, const std::string& name, const std::function<Outcome()>& fn, int& failures) {
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << "CRITERION " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << name << ": " << o.detail
            << std::endl;
}

}  // namespace

int main() {
  int failures = 0;
  report(1, "formula examples", formula_examples, failures);
  report(2, "gradient oracle", gradient_oracle, failures);
  report(3, "oracle equivalence", oracle_equivalence, failures);
  report(4, "mean teacher invariants", mean_teacher_invariants, failures);

  DatasetSplit data;
  std::string data_error;
  try {
    data = load_data(SyntheticSource{});
  } catch (const std::exception& e) {
    data_error = e.what();
  }
  auto with_data = [&](const std::function<Outcome()>& fn) {
    return [&, fn] { return data_error.empty() ? fn() : Outcome{false, "data: " + data_error}; };
  };
  report(5, "label efficiency", with_data([&] { return label_efficiency(data); }), failures);
  AblationResult ablation;
  bool ablation_ran = false;
  auto run_ablation = [&] {
    if (!ablation_ran) {
      ablation_ran = true;
      ablation = attention_ablation(data);
    }
  };
  report(6, "attention ablation", with_data([&] {
           run_ablation();
           return ablation.attention;
         }),
         failures);
  report(7, "learnability floor", with_data([&] {
           run_ablation();
           return ablation.learnability;
         }),
         failures);
  report(8, "determinism", determinism, failures);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
