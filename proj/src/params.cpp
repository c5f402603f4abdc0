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

#include "mtseg/params.hpp"

#include <cstring>
#include <sstream>
#include <stdexcept>

namespace mtseg {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

template <typename T>
Tensor<T>& ParamSet<T>::add(std::string name, Shape shape) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.push_back(Entry{std::move(name), Tensor<T>(std::move(shape))});
  return entries_.back().value;
}

template <typename T>
Tensor<T>& ParamSet<T>::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return entries_[it->second].value;
}

template <typename T>
const Tensor<T>& ParamSet<T>::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return entries_[it->second].value;
}

template <typename T>
std::size_t ParamSet<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

template <typename T>
bool ParamSet<T>::same_layout(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (entries_[i].value.shape() != other.entries_[i].value.shape()) return false;
  }
  return true;
}

template <typename T>
bool ParamSet<T>::same_values(const ParamSet& other) const {
  if (!same_layout(other)) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i].value;
    const auto& b = other.entries_[i].value;
    if (std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) != 0) return false;
  }
  return true;
}

template <typename T>
ParamSet<T> ParamSet<T>::zeros_like() const {
  ParamSet out(role_);
  for (const auto& e : entries_) out.add(e.name, e.value.shape());
  return out;
}

template <typename T>
void accumulate(ParamSet<T>& a, const ParamSet<T>& b) {
  if (!a.same_layout(b)) throw std::invalid_argument("accumulate: parameter layouts differ");
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto& dst = a.entries()[i].value;
    const auto& src = b.entries()[i].value;
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

template class ParamSet<float>;
template class ParamSet<double>;
template void accumulate(ParamSet<float>&, const ParamSet<float>&);
template void accumulate(ParamSet<double>&, const ParamSet<double>&);

}  // namespace mtseg
