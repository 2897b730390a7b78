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

#ifndef PDNET_AUTODIFF_TENSOR_H_
#define PDNET_AUTODIFF_TENSOR_H_

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "pdnet/common/errors.h"

namespace pdnet {

inline constexpr std::size_t kBufferAlignment = 64;

// Cache-line aligned storage. Vectorized kernels peel unaligned heads, so a
// fixed base alignment keeps float summation order, and results, stable.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{kBufferAlignment}));
  }
  void deallocate(T* p, std::size_t) { ::operator delete(p, std::align_val_t{kBufferAlignment}); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const {
    return true;
  }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

using Shape = std::vector<int>;

std::string ShapeToString(const Shape& shape);

// Number of elements; throws DimensionError on a non-positive extent.
size_t ShapeSize(const Shape& shape);

// Dense row-major tensor with an optional gradient buffer of the same shape.
// Training runs in float; the double instantiation exists so that gradient
// oracles can evaluate the exact same graphs in 64-bit.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(ShapeSize(shape_), fill) {}
  BasicTensor(Shape shape, std::initializer_list<T> data)
      : BasicTensor(std::move(shape), AlignedVector<T>(data)) {}
  BasicTensor(Shape shape, const std::vector<T>& data)
      : BasicTensor(std::move(shape), AlignedVector<T>(data.begin(), data.end())) {}
  BasicTensor(Shape shape, AlignedVector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (ShapeSize(shape_) != data_.size()) {
      throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                           " does not match shape " + ShapeToString(shape_));
    }
  }

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const { return shape_.at(static_cast<size_t>(axis)); }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* raw() { return data_.data(); }
  const T* raw() const { return data_.data(); }
  std::vector<T> values() const { return {data_.begin(), data_.end()}; }

  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  // 2-D and 3-D element access (row-major).
  T& at(int r, int c) { return data_[static_cast<size_t>(r) * shape_[1] + c]; }
  const T& at(int r, int c) const {
    return data_[static_cast<size_t>(r) * shape_[1] + c];
  }
  T& at(int a, int b, int c) {
    return data_[(static_cast<size_t>(a) * shape_[1] + b) * shape_[2] + c];
  }
  const T& at(int a, int b, int c) const {
    return data_[(static_cast<size_t>(a) * shape_[1] + b) * shape_[2] + c];
  }

  bool has_grad() const { return !grad_.empty(); }
  std::span<T> grad() { return grad_; }
  std::span<const T> grad() const { return grad_; }
  void EnsureGrad() {
    if (grad_.size() != data_.size()) grad_.assign(data_.size(), T(0));
  }
  void ZeroGrad() { std::fill(grad_.begin(), grad_.end(), T(0)); }
  void DropGrad() {
    grad_.clear();
    grad_.shrink_to_fit();
  }

  // Same data under a new shape with equal element count.
  BasicTensor Reshaped(Shape shape) const {
    if (ShapeSize(shape) != data_.size()) {
      throw DimensionError("cannot reshape " + ShapeToString(shape_) + " to " +
                           ShapeToString(shape));
    }
    return BasicTensor(std::move(shape), data_);
  }

  // Value copy into another scalar type; the gradient is not carried over.
  template <typename U>
  BasicTensor<U> Cast() const {
    AlignedVector<U> out(data_.begin(), data_.end());
    return BasicTensor<U>(shape_, std::move(out));
  }

  bool SameValues(const BasicTensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  Shape shape_;
  AlignedVector<T> data_;
  AlignedVector<T> grad_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

// Feature matrices are F x N tensors: one row per feature, one column per
// 10 ms frame.
using FeatureMatrix = Tensor;

}  // namespace pdnet

#endif  // PDNET_AUTODIFF_TENSOR_H_
