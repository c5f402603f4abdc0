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

#include <string>
#include <unordered_map>
#include <vector>

#include "mtseg/tensor.hpp"

namespace mtseg {

enum class ParamRole { student, teacher };

/// Named parameter arrays in registration order. Student and teacher copies
/// share one layout; only the role tag and values differ.
template <typename T>
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor<T> value;
  };

  ParamSet() = default;
  explicit ParamSet(ParamRole role) : role_(role) {}

  ParamRole role() const { return role_; }
  void set_role(ParamRole role) { role_ = role; }

  Tensor<T>& add(std::string name, Shape shape);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Tensor<T>& get(const std::string& name);
  const Tensor<T>& get(const std::string& name) const;

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  /// Same names, order and shapes.
  bool same_layout(const ParamSet& other) const;
  /// Same layout and bit-identical values; the role tag is ignored.
  bool same_values(const ParamSet& other) const;

  ParamSet zeros_like() const;

  template <typename U>
  ParamSet<U> cast() const {
    ParamSet<U> out(role_);
    for (const auto& e : entries_) out.add(e.name, e.value.shape()) = e.value.template cast<U>();
    return out;
  }

 private:
  ParamRole role_ = ParamRole::student;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Deep copy tagged as the teacher.
template <typename T>
ParamSet<T> clone_params(const ParamSet<T>& student) {
  ParamSet<T> teacher = student;
  teacher.set_role(ParamRole::teacher);
  return teacher;
}

/// a += b element-wise over matching layouts.
template <typename T>
void accumulate(ParamSet<T>& a, const ParamSet<T>& b);

extern template class ParamSet<float>;
extern template class ParamSet<double>;

}  // namespace mtseg
