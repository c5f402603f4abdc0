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

#include "mtseg/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "mtseg/hash.hpp"

namespace mtseg {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Visits the keys of one object and records the ones nobody asked for.
class Reader {
 public:
  Reader(const json& obj, std::string path, std::vector<std::string>& unknown)
      : obj_(obj), path_(std::move(path)), unknown_(unknown) {
    if (!obj.is_object()) fail(path_.empty() ? "$" : path_, "expected an object");
  }
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) unknown_.push_back(join(path_, key));
    }
  }

  template <typename F>
  void read(const std::string& key, F&& f) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it != obj_.end()) f(*it, join(path_, key));
  }
  bool has(const std::string& key) const { return obj_.contains(key); }
  const std::string& path() const { return path_; }
  std::vector<std::string>& unknown() { return unknown_; }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& unknown_;
  std::set<std::string> seen_;
};

std::size_t as_size(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
    fail(path, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  const long long x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) fail(path, "integer out of range");
  return static_cast<int>(x);
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

LabelBudgetSpec as_budget(const json& v, const std::string& path) {
  if (v.is_string()) {
    if (v.get<std::string>() == "all") return std::nullopt;
    fail(path, "expected a non-negative integer or \"all\"");
  }
  return as_size(v, path);
}

void report_unknown(const std::vector<std::string>& unknown) {
  if (unknown.empty()) return;
  std::string msg = "unknown config key";
  msg += unknown.size() > 1 ? "s: " : ": ";
  for (std::size_t i = 0; i < unknown.size(); ++i) msg += (i ? ", " : "") + unknown[i];
  throw ConfigError(msg);
}

ModelConfig read_model(const json& doc, const std::string& path, std::vector<std::string>& unknown) {
  ModelConfig m;
  {
    Reader r(doc, path, unknown);
    r.read("in_channels", [&](const json& v, const std::string& p) { m.in_channels = as_int(v, p); });
    r.read("num_classes", [&](const json& v, const std::string& p) { m.num_classes = as_int(v, p); });
    r.read("depth", [&](const json& v, const std::string& p) { m.depth = as_int(v, p); });
    r.read("base_channels", [&](const json& v, const std::string& p) { m.base_channels = as_int(v, p); });
    r.read("attention", [&](const json& v, const std::string& p) { m.attention_enabled = as_bool(v, p); });
    r.read("cse_reduction", [&](const json& v, const std::string& p) { m.cse_reduction = as_int(v, p); });
  }
  return m;
}

TrainConfig read_train(const json& doc, const std::string& path, std::vector<std::string>& unknown) {
  TrainConfig t;
  Reader r(doc, path, unknown);
  r.read("mode", [&](const json& v, const std::string& p) {
    try {
      t.mode = parse_mode(as_string(v, p));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      fail(p, e.what());
    }
  });
  r.read("iterations", [&](const json& v, const std::string& p) { t.total_iterations = as_size(v, p); });
  r.read("batch_size", [&](const json& v, const std::string& p) { t.batch_size = as_size(v, p); });
  r.read("base_lr", [&](const json& v, const std::string& p) { t.base_lr = as_double(v, p); });
  r.read("momentum", [&](const json& v, const std::string& p) { t.momentum = as_double(v, p); });
  r.read("w1", [&](const json& v, const std::string& p) { t.w1 = as_double(v, p); });
  r.read("ramp_up_length", [&](const json& v, const std::string& p) { t.ramp_up_length = as_size(v, p); });
  r.read("ema_beta_rampup", [&](const json& v, const std::string& p) { t.ema_beta_rampup = as_double(v, p); });
  r.read("ema_beta_main", [&](const json& v, const std::string& p) { t.ema_beta_main = as_double(v, p); });
  r.read("noise", [&](const json& v, const std::string& p) {
    Reader n(v, p, r.unknown());
    n.read("sigma", [&](const json& x, const std::string& q) { t.noise.sigma = as_double(x, q); });
    n.read("enabled", [&](const json& x, const std::string& q) { t.noise.enabled = as_bool(x, q); });
  });
  r.read("noise_on_labeled", [&](const json& v, const std::string& p) { t.noise_on_labeled = as_bool(v, p); });
  r.read("consistency_on_labeled",
         [&](const json& v, const std::string& p) { t.consistency_on_labeled = as_bool(v, p); });
  r.read("seed", [&](const json& v, const std::string& p) { t.seed = as_size(v, p); });
  r.read("labels", [&](const json& v, const std::string& p) { t.label_budget = as_budget(v, p); });
  r.read("checkpoint_interval", [&](const json& v, const std::string& p) { t.checkpoint_interval = as_size(v, p); });
  r.read("w2_override", [&](const json& v, const std::string& p) {
    if (v.is_null()) {
      t.w2_override.reset();
    } else {
      t.w2_override = as_double(v, p);
    }
  });
  return t;
}

DataSource read_data(const json& doc, const std::string& path, std::vector<std::string>& unknown) {
  Reader r(doc, path, unknown);
  std::string source = "synthetic";
  r.read("source", [&](const json& v, const std::string& p) { source = as_string(v, p); });
  if (source == "synthetic") {
    SyntheticSource s;
    r.read("seed", [&](const json& v, const std::string& p) { s.seed = as_size(v, p); });
    r.read("train_patients", [&](const json& v, const std::string& p) { s.train_patients = as_size(v, p); });
    r.read("val_patients", [&](const json& v, const std::string& p) { s.val_patients = as_size(v, p); });
    r.read("images_per_patient", [&](const json& v, const std::string& p) { s.images_per_patient = as_size(v, p); });
    r.read("val_images_per_patient",
           [&](const json& v, const std::string& p) { s.val_images_per_patient = as_size(v, p); });
    r.read("side", [&](const json& v, const std::string& p) { s.side = as_size(v, p); });
    if (s.side < 32) fail(join(path, "side"), "must be at least 32");
    if (s.train_patients == 0) fail(join(path, "train_patients"), "must be positive");
    return s;
  }
  if (source == "directory") {
    DirectorySource d;
    r.read("path", [&](const json& v, const std::string& p) { d.path = as_string(v, p); });
    if (d.path.empty()) fail(join(path, "path"), "missing field");
    return d;
  }
  if (source == "external") {
    ExternalSource e;
    r.read("images", [&](const json& v, const std::string& p) { e.images = as_string(v, p); });
    r.read("masks", [&](const json& v, const std::string& p) { e.masks = as_string(v, p); });
    r.read("annotations", [&](const json& v, const std::string& p) { e.annotations = as_string(v, p); });
    r.read("patient_separator", [&](const json& v, const std::string& p) { e.patient_separator = as_string(v, p); });
    r.read("val_patients", [&](const json& v, const std::string& p) {
      if (!v.is_array()) fail(p, "expected an array of strings");
      for (std::size_t i = 0; i < v.size(); ++i) e.val_patients.push_back(as_string(v[i], p + "[" + std::to_string(i) + "]"));
    });
    if (e.images.empty()) fail(join(path, "images"), "missing field");
    if (e.masks.empty() == e.annotations.empty()) fail(path, "exactly one of masks or annotations is required");
    if (e.patient_separator.empty()) fail(join(path, "patient_separator"), "must not be empty");
    return e;
  }
  fail(join(path, "source"), "unknown data source '" + source + "' (expected synthetic, directory or external)");
}

template <typename F>
auto validated(const std::string& section, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(section + ": " + e.what());
  }
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string budget_name(const LabelBudgetSpec& budget) { return budget ? std::to_string(*budget) : "all"; }

LabelBudgetSpec parse_budget(const std::string& text) {
  if (text == "all") return std::nullopt;
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || text[0] == '-') {
    throw ConfigError("label budget '" + text + "' is neither a non-negative integer nor \"all\"");
  }
  return static_cast<std::size_t>(v);
}

json to_json(const ModelConfig& m) {
  return json{{"in_channels", m.in_channels}, {"num_classes", m.num_classes},     {"depth", m.depth},
              {"base_channels", m.base_channels}, {"attention", m.attention_enabled}, {"cse_reduction", m.cse_reduction}};
}

json to_json(const TrainConfig& t) {
  json j{{"mode", mode_name(t.mode)},
         {"iterations", t.total_iterations},
         {"batch_size", t.batch_size},
         {"base_lr", t.base_lr},
         {"momentum", t.momentum},
         {"w1", t.w1},
         {"ramp_up_length", t.ramp_up_length},
         {"ema_beta_rampup", t.ema_beta_rampup},
         {"ema_beta_main", t.ema_beta_main},
         {"noise", {{"sigma", t.noise.sigma}, {"enabled", t.noise.enabled}}},
         {"noise_on_labeled", t.noise_on_labeled},
         {"consistency_on_labeled", t.consistency_on_labeled},
         {"seed", t.seed},
         {"checkpoint_interval", t.checkpoint_interval}};
  j["labels"] = t.label_budget ? json(*t.label_budget) : json("all");
  j["w2_override"] = t.w2_override ? json(*t.w2_override) : json(nullptr);
  return j;
}

json to_json(const DataSource& source) {
  if (const auto* s = std::get_if<SyntheticSource>(&source)) {
    return json{{"source", "synthetic"},
                {"seed", s->seed},
                {"train_patients", s->train_patients},
                {"val_patients", s->val_patients},
                {"images_per_patient", s->images_per_patient},
                {"val_images_per_patient", s->val_images_per_patient},
                {"side", s->side}};
  }
  if (const auto* d = std::get_if<DirectorySource>(&source)) {
    return json{{"source", "directory"}, {"path", d->path.string()}};
  }
  const auto& e = std::get<ExternalSource>(source);
  json j{{"source", "external"},
         {"images", e.images.string()},
         {"val_patients", e.val_patients},
         {"patient_separator", e.patient_separator}};
  if (!e.masks.empty()) j["masks"] = e.masks.string();
  if (!e.annotations.empty()) j["annotations"] = e.annotations.string();
  return j;
}

json to_json(const RunConfig& c) {
  return json{{"model", to_json(c.model)}, {"train", to_json(c.train)}, {"data", to_json(c.data)}};
}

json to_json(const ExperimentSpec& s) {
  json budgets = json::array();
  for (const auto& b : s.budgets) budgets.push_back(b ? json(*b) : json("all"));
  json modes = json::array();
  for (auto m : s.modes) modes.push_back(mode_name(m));
  return json{{"name", s.name},
              {"budgets", budgets},
              {"modes", modes},
              {"seeds", s.seeds},
              {"model", to_json(s.model)},
              {"train", to_json(s.train)},
              {"data", to_json(s.data)},
              {"parallel_cells", s.parallel_cells}};
}

ModelConfig parse_model_config(const json& doc) {
  std::vector<std::string> unknown;
  ModelConfig m = read_model(doc, "model", unknown);
  report_unknown(unknown);
  validated("model", [&] {
    m.validate();
    return 0;
  });
  return m;
}

TrainConfig parse_train_config(const json& doc) {
  std::vector<std::string> unknown;
  TrainConfig t = read_train(doc, "train", unknown);
  report_unknown(unknown);
  validated("train", [&] {
    t.validate();
    return 0;
  });
  return t;
}

DataSource parse_data_source(const json& doc) {
  std::vector<std::string> unknown;
  DataSource d = read_data(doc, "data", unknown);
  report_unknown(unknown);
  return d;
}

RunConfig parse_run_config(const json& doc) {
  std::vector<std::string> unknown;
  RunConfig c;
  {
    Reader r(doc, "", unknown);
    r.read("model", [&](const json& v, const std::string& p) { c.model = read_model(v, p, unknown); });
    r.read("train", [&](const json& v, const std::string& p) { c.train = read_train(v, p, unknown); });
    r.read("data", [&](const json& v, const std::string& p) { c.data = read_data(v, p, unknown); });
  }
  report_unknown(unknown);
  validated("model", [&] {
    c.model.validate();
    return 0;
  });
  validated("train", [&] {
    c.train.validate();
    return 0;
  });
  return c;
}

RunConfig parse_run_config_text(const std::string& text) { return parse_run_config(parse_text(text)); }

void ExperimentSpec::validate() const {
  if (budgets.empty()) throw ConfigError("budgets: at least one label budget is required");
  if (modes.empty()) throw ConfigError("modes: at least one mode is required");
  if (seeds.empty()) throw ConfigError("seeds: at least one seed is required");
  auto unique = [](auto values, const char* what) {
    std::sort(values.begin(), values.end());
    if (std::adjacent_find(values.begin(), values.end()) != values.end()) {
      throw ConfigError(std::string(what) + ": duplicate entries");
    }
  };
  unique(budgets, "budgets");
  unique(modes, "modes");
  unique(seeds, "seeds");
  validated("model", [&] {
    model.validate();
    return 0;
  });
  for (auto mode : modes) {
    TrainConfig t = train;
    t.mode = mode;
    validated("train", [&] {
      t.validate();
      return 0;
    });
  }
}

ExperimentSpec parse_experiment_spec(const json& doc) {
  std::vector<std::string> unknown;
  ExperimentSpec s;
  {
    Reader r(doc, "", unknown);
    r.read("name", [&](const json& v, const std::string& p) { s.name = as_string(v, p); });
    r.read("budgets", [&](const json& v, const std::string& p) {
      if (!v.is_array()) fail(p, "expected an array");
      for (std::size_t i = 0; i < v.size(); ++i) s.budgets.push_back(as_budget(v[i], p + "[" + std::to_string(i) + "]"));
    });
    r.read("modes", [&](const json& v, const std::string& p) {
      if (!v.is_array()) fail(p, "expected an array");
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string q = p + "[" + std::to_string(i) + "]";
        const std::string text = as_string(v[i], q);
        if (text != "fully" && text != "semi") fail(q, "expected \"fully\" or \"semi\"");
        s.modes.push_back(parse_mode(text));
      }
    });
    r.read("seeds", [&](const json& v, const std::string& p) {
      if (!v.is_array()) fail(p, "expected an array");
      for (std::size_t i = 0; i < v.size(); ++i) s.seeds.push_back(as_size(v[i], p + "[" + std::to_string(i) + "]"));
    });
    r.read("model", [&](const json& v, const std::string& p) { s.model = read_model(v, p, unknown); });
    r.read("train", [&](const json& v, const std::string& p) { s.train = read_train(v, p, unknown); });
    r.read("data", [&](const json& v, const std::string& p) { s.data = read_data(v, p, unknown); });
    r.read("parallel_cells", [&](const json& v, const std::string& p) { s.parallel_cells = as_bool(v, p); });
  }
  report_unknown(unknown);
  s.validate();
  return s;
}

ExperimentSpec parse_experiment_spec_text(const std::string& text) { return parse_experiment_spec(parse_text(text)); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_hash(const ModelConfig& model, const TrainConfig& train) {
  Fnv1a h;
  h.update(to_json(model).dump());
  h.update(to_json(train).dump());
  return h.hex();
}

}  // namespace mtseg
