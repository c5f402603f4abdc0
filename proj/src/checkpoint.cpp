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

#include "mtseg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "mtseg/config.hpp"

namespace mtseg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
}

void write_blob(const fs::path& path, const Tensor<float>& t) {
  std::vector<std::uint32_t> words(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) words[i] = to_little(std::bit_cast<std::uint32_t>(t[i]));
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 4));
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

void read_blob(const fs::path& path, Tensor<float>& t) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("checkpoint blob '" + path.string() + "' is missing");
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != t.size() * 4) {
    throw std::runtime_error("checkpoint blob '" + path.string() + "' has " + std::to_string(bytes) +
                             " bytes, expected " + std::to_string(t.size() * 4));
  }
  in.seekg(0);
  std::vector<std::uint32_t> words(t.size());
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::bit_cast<float>(to_little(words[i]));
}

std::string blob_name(const std::string& array) { return array + ".bin"; }

}  // namespace

void save_checkpoint(const fs::path& dir, const Checkpoint& ck) {
  if (!ck.student.same_layout(ck.teacher)) throw std::invalid_argument("checkpoint: student and teacher layouts differ");
  const fs::path target = fs::absolute(dir);
  const fs::path parent = target.parent_path();
  fs::create_directories(parent);
  const fs::path tmp = parent / (target.filename().string() + ".tmp");
  const fs::path old = parent / (target.filename().string() + ".old");
  fs::remove_all(tmp);
  fs::create_directories(tmp / "student");
  fs::create_directories(tmp / "teacher");

  json arrays = json::array();
  for (std::size_t i = 0; i < ck.student.size(); ++i) {
    const auto& s = ck.student.entries()[i];
    arrays.push_back({{"name", s.name}, {"shape", s.value.shape()}});
    write_blob(tmp / "student" / blob_name(s.name), s.value);
    write_blob(tmp / "teacher" / blob_name(s.name), ck.teacher.entries()[i].value);
  }
  const json manifest{{"version", kCheckpointVersion},
                      {"model", to_json(ck.model)},
                      {"iteration", ck.iteration},
                      {"epoch", ck.epoch},
                      {"ema_beta", ck.ema_beta},
                      {"ema_phase", ck.ema_phase},
                      {"seed", ck.seed},
                      {"config_hash", ck.config_hash},
                      {"data_hash", ck.data_hash},
                      {"byte_order", "little"},
                      {"dtype", "float32"},
                      {"arrays", arrays}};
  {
    std::ofstream out(tmp / "manifest.json");
    out << manifest.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write checkpoint manifest in '" + tmp.string() + "'");
  }

  fs::remove_all(old);
  if (fs::exists(target)) fs::rename(target, old);
  fs::rename(tmp, target);
  fs::remove_all(old);
}

Checkpoint load_checkpoint(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("checkpoint manifest '" + manifest_path.string() + "' is missing");
  json m;
  try {
    m = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("checkpoint manifest '" + manifest_path.string() + "' is malformed: " + e.what());
  }
  if (m.value("version", 0) != kCheckpointVersion) {
    throw std::runtime_error("checkpoint '" + dir.string() + "' has an unsupported version");
  }
  Checkpoint ck;
  ck.model = parse_model_config(m.at("model"));
  ck.iteration = m.at("iteration").get<std::size_t>();
  ck.epoch = m.at("epoch").get<std::size_t>();
  ck.ema_beta = m.at("ema_beta").get<double>();
  ck.ema_phase = m.at("ema_phase").get<std::string>();
  ck.seed = m.at("seed").get<std::uint64_t>();
  ck.config_hash = m.at("config_hash").get<std::string>();
  ck.data_hash = m.at("data_hash").get<std::string>();

  const ParamSet<float> expected = UNet<float>(ck.model).layout();
  for (const auto& a : m.at("arrays")) {
    const std::string name = a.at("name").get<std::string>();
    const Shape shape = a.at("shape").get<Shape>();
    if (!expected.contains(name) || expected.get(name).shape() != shape) {
      throw std::runtime_error("checkpoint array '" + name + "' does not match the model configuration");
    }
    read_blob(dir / "student" / blob_name(name), ck.student.add(name, shape));
    read_blob(dir / "teacher" / blob_name(name), ck.teacher.add(name, shape));
  }
  if (!ck.student.same_layout(expected)) {
    throw std::runtime_error("checkpoint '" + dir.string() + "' does not hold every model array");
  }
  return ck;
}

}  // namespace mtseg
