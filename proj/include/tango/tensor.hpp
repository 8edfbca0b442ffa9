/*
 * Copyright (c) 2026 the tango authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TANGO_TENSOR_HPP
#define TANGO_TENSOR_HPP

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "tango/error.hpp"

namespace tango {

/// Rank 1..3 extent list. Rank-3 tensors are channel-major (C,H,W):
/// channel outermost, then row, then column. Rank-1 is a flat vector,
/// rank-2 a row-major matrix (used for weight matrices).
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<int> dims) : Shape(std::vector<int>(dims)) {}
  explicit Shape(std::vector<int> dims);

  int rank() const { return static_cast<int>(dims_.size()); }
  int dim(int i) const { return dims_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& dims() const { return dims_; }

  // Rank-3 accessors.
  int channels() const;
  int height() const;
  int width() const;

  std::int64_t count() const;
  std::string to_string() const;  // e.g. "3x227x227"

  bool operator==(const Shape&) const = default;

 private:
  std::vector<int> dims_;
};

/// Row-major flat offset of (c,y,x) in a rank-3 shape: c*H*W + y*W + x.
/// Bijective over the index domain; throws IndexError out of range.
std::int64_t flat_index(const Shape& shape, int c, int y, int x);

/// Observes tensor buffer lifetimes so a run can account live activation
/// bytes. Install with AccountantScope; tensors created while a scope is
/// active report their allocation to it and their release back to it,
/// even if the scope has ended by then.
class MemoryAccountant {
 public:
  void on_alloc(std::size_t bytes);
  void on_free(std::size_t bytes);

  std::size_t live_bytes() const { return live_; }
  std::size_t peak_bytes() const { return peak_; }
  void reset();

 private:
  std::size_t live_ = 0;
  std::size_t peak_ = 0;
};

/// Installs `a` as the active accountant for the current thread.
class AccountantScope {
 public:
  explicit AccountantScope(MemoryAccountant& a);
  ~AccountantScope();
  AccountantScope(const AccountantScope&) = delete;
  AccountantScope& operator=(const AccountantScope&) = delete;

 private:
  MemoryAccountant* previous_;
};

/// Dense tensor of 32-bit reals in channel-major layout. Owns its buffer.
/// Treated as immutable once a layer has produced it; kernels allocate a
/// fresh output instead of mutating inputs.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape);
  static Tensor constant(const Shape& shape, float value);
  static Tensor from_buffer(const Shape& shape, std::span<const float> values);

  Tensor(const Tensor& other);
  Tensor& operator=(const Tensor& other);
  Tensor(Tensor&& other) noexcept;
  Tensor& operator=(Tensor&& other) noexcept;
  ~Tensor();

  const Shape& shape() const { return shape_; }
  std::int64_t count() const { return static_cast<std::int64_t>(data_.size()); }
  std::size_t bytes() const { return data_.size() * sizeof(float); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<const float> values() const { return {data_.data(), data_.size()}; }

  float& at(int c, int y, int x) { return data_[static_cast<std::size_t>(flat_index(shape_, c, y, x))]; }
  float at(int c, int y, int x) const { return data_[static_cast<std::size_t>(flat_index(shape_, c, y, x))]; }
  float& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  float operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  bool bit_equal(const Tensor& other) const;

 private:
  Tensor(Shape shape, std::vector<float> data);
  void account_alloc();
  void account_free();

  Shape shape_;
  std::vector<float> data_;
  MemoryAccountant* accountant_ = nullptr;
};

/// Joins two rank-3 tensors along the channel axis; `a`'s channels come
/// first. Spatial extents must match.
Tensor concat_channels(const Tensor& a, const Tensor& b);

}  // namespace tango

#endif  // TANGO_TENSOR_HPP
