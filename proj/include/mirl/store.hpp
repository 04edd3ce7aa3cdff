// SPDX-License-Identifier: Apache-2.0
//
// Ordered collection of named parameter tensors. Enumeration order is
// insertion order and is the canonical order for masks, serialization and
// gradient buffers.
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "mirl/tensor.hpp"

namespace mirl {

template <typename T>
struct ParamEntry {
  std::string name;
  Tensor<T> tensor;
  bool prunable = false;
  bool output_layer = false;
};

template <typename T>
class NamedTensorStore {
 public:
  void add(std::string name, Tensor<T> tensor, bool prunable, bool output_layer = false) {
    require(!index_.count(name), "duplicate parameter name: " + name);
    index_[name] = entries_.size();
    entries_.push_back(ParamEntry<T>{std::move(name), std::move(tensor), prunable, output_layer});
  }

  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t find(const std::string& name) const {
    auto it = index_.find(name);
    require(it != index_.end(), "unknown parameter: " + name);
    return it->second;
  }

  ParamEntry<T>& entry(std::size_t i) { return entries_.at(i); }
  const ParamEntry<T>& entry(std::size_t i) const { return entries_.at(i); }

  Tensor<T>& tensor(const std::string& name) { return entries_[find(name)].tensor; }
  const Tensor<T>& tensor(const std::string& name) const { return entries_[find(name)].tensor; }

  std::vector<ParamEntry<T>>& entries() { return entries_; }
  const std::vector<ParamEntry<T>>& entries() const { return entries_; }

  std::size_t total_params() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.tensor.size();
    return n;
  }

  std::size_t prunable_params() const {
    std::size_t n = 0;
    for (const auto& e : entries_)
      if (e.prunable) n += e.tensor.size();
    return n;
  }

  template <typename U>
  NamedTensorStore<U> cast() const {
    NamedTensorStore<U> out;
    for (const auto& e : entries_) out.add(e.name, e.tensor.template cast<U>(), e.prunable, e.output_layer);
    return out;
  }

  bool bit_equal(const NamedTensorStore& o) const {
    if (entries_.size() != o.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].name != o.entries_[i].name) return false;
      if (entries_[i].tensor.shape != o.entries_[i].tensor.shape) return false;
      if (entries_[i].tensor.values != o.entries_[i].tensor.values) return false;
    }
    return true;
  }

 private:
  std::vector<ParamEntry<T>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace mirl
