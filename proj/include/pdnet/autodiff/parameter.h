// Copyright (c) 2026 The pdnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PDNET_AUTODIFF_PARAMETER_H_
#define PDNET_AUTODIFF_PARAMETER_H_

#include <string>
#include <vector>

#include "pdnet/autodiff/tensor.h"

namespace pdnet {

template <typename T>
struct BasicParameter {
  std::string name;
  BasicTensor<T> tensor;
};

// Ordered collection of uniquely named parameters. Order is insertion order
// and is what serialization and SGD iterate over.
template <typename T>
class BasicParameterSet {
 public:
  BasicParameter<T>& Add(std::string name, BasicTensor<T> tensor) {
    if (Contains(name)) throw ConfigError("duplicate parameter name: " + name);
    params_.push_back({std::move(name), std::move(tensor)});
    return params_.back();
  }

  bool Contains(const std::string& name) const {
    for (const auto& p : params_) {
      if (p.name == name) return true;
    }
    return false;
  }

  BasicParameter<T>& Get(const std::string& name) {
    for (auto& p : params_) {
      if (p.name == name) return p;
    }
    throw ConfigError("no parameter named " + name);
  }
  const BasicParameter<T>& Get(const std::string& name) const {
    return const_cast<BasicParameterSet*>(this)->Get(name);
  }

  size_t size() const { return params_.size(); }
  bool empty() const { return params_.empty(); }
  BasicParameter<T>& operator[](size_t i) { return params_[i]; }
  const BasicParameter<T>& operator[](size_t i) const { return params_[i]; }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void EnsureGrads() {
    for (auto& p : params_) p.tensor.EnsureGrad();
  }
  void ZeroGrads() {
    for (auto& p : params_) p.tensor.ZeroGrad();
  }
  void DropGrads() {
    for (auto& p : params_) p.tensor.DropGrad();
  }

  size_t TotalSize() const {
    size_t n = 0;
    for (const auto& p : params_) n += p.tensor.size();
    return n;
  }

  template <typename U>
  BasicParameterSet<U> Cast() const {
    BasicParameterSet<U> out;
    for (const auto& p : params_) out.Add(p.name, p.tensor.template Cast<U>());
    return out;
  }

  // Names, shapes and values all equal (gradients ignored).
  bool SameValues(const BasicParameterSet& other) const {
    if (params_.size() != other.params_.size()) return false;
    for (size_t i = 0; i < params_.size(); ++i) {
      if (params_[i].name != other.params_[i].name ||
          !params_[i].tensor.SameValues(other.params_[i].tensor)) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<BasicParameter<T>> params_;
};

using Parameter = BasicParameter<float>;
using ParameterSet = BasicParameterSet<float>;

}  // namespace pdnet

#endif  // PDNET_AUTODIFF_PARAMETER_H_
