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

#include "tango/tensor.hpp"

#include <algorithm>
#include <cstring>
#include <utility>

namespace tango {

namespace {
constexpr std::int64_t kMaxElements = std::int64_t{1} << 31;

thread_local MemoryAccountant* g_active_accountant = nullptr;
}  // namespace

Shape::Shape(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty() || dims_.size() > 3) {
    throw ShapeError("shape rank must be 1..3, got " + std::to_string(dims_.size()));
  }
  std::int64_t n = 1;
  for (int d : dims_) {
    if (d < 1) {
      throw ShapeError("shape extent must be >= 1, got " + std::to_string(d));
    }
    n *= d;
    if (n > kMaxElements) {
      throw ShapeError("shape element count exceeds 2^31");
    }
  }
}

int Shape::channels() const {
  if (rank() != 3) throw ShapeError("channels() requires a rank-3 shape, got " + to_string());
  return dims_[0];
}

int Shape::height() const {
  if (rank() != 3) throw ShapeError("height() requires a rank-3 shape, got " + to_string());
  return dims_[1];
}

int Shape::width() const {
  if (rank() != 3) throw ShapeError("width() requires a rank-3 shape, got " + to_string());
  return dims_[2];
}

std::int64_t Shape::count() const {
  std::int64_t n = 1;
  for (int d : dims_) n *= d;
  return n;
}

std::string Shape::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(dims_[i]);
  }
  return s;
}

std::int64_t flat_index(const Shape& shape, int c, int y, int x) {
  if (shape.rank() != 3) {
    throw ShapeError("flat_index requires a rank-3 shape, got " + shape.to_string());
  }
  const int C = shape.dim(0), H = shape.dim(1), W = shape.dim(2);
  if (c < 0 || c >= C || y < 0 || y >= H || x < 0 || x >= W) {
    throw IndexError("index (" + std::to_string(c) + "," + std::to_string(y) + "," +
                     std::to_string(x) + ") out of range for shape " + shape.to_string());
  }
  return (static_cast<std::int64_t>(c) * H + y) * W + x;
}

void MemoryAccountant::on_alloc(std::size_t bytes) {
  live_ += bytes;
  peak_ = std::max(peak_, live_);
}

void MemoryAccountant::on_free(std::size_t bytes) {
  live_ -= std::min(live_, bytes);
}

void MemoryAccountant::reset() {
  live_ = 0;
  peak_ = 0;
}

AccountantScope::AccountantScope(MemoryAccountant& a) : previous_(g_active_accountant) {
  g_active_accountant = &a;
}

AccountantScope::~AccountantScope() { g_active_accountant = previous_; }

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  account_alloc();
}

void Tensor::account_alloc() {
  accountant_ = g_active_accountant;
  if (accountant_ && !data_.empty()) accountant_->on_alloc(bytes());
}

void Tensor::account_free() {
  if (accountant_ && !data_.empty()) accountant_->on_free(bytes());
  accountant_ = nullptr;
}

Tensor::Tensor(const Tensor& other) : shape_(other.shape_), data_(other.data_) {
  account_alloc();
}

Tensor& Tensor::operator=(const Tensor& other) {
  if (this != &other) {
    account_free();
    shape_ = other.shape_;
    data_ = other.data_;
    account_alloc();
  }
  return *this;
}

Tensor::Tensor(Tensor&& other) noexcept
    : shape_(std::move(other.shape_)),
      data_(std::move(other.data_)),
      accountant_(other.accountant_) {
  other.accountant_ = nullptr;
  other.data_.clear();
}

Tensor& Tensor::operator=(Tensor&& other) noexcept {
  if (this != &other) {
    account_free();
    shape_ = std::move(other.shape_);
    data_ = std::move(other.data_);
    accountant_ = other.accountant_;
    other.accountant_ = nullptr;
    other.data_.clear();
  }
  return *this;
}

Tensor::~Tensor() { account_free(); }

Tensor Tensor::zeros(const Shape& shape) {
  return Tensor(shape, std::vector<float>(static_cast<std::size_t>(shape.count()), 0.0f));
}

Tensor Tensor::constant(const Shape& shape, float value) {
  return Tensor(shape, std::vector<float>(static_cast<std::size_t>(shape.count()), value));
}

Tensor Tensor::from_buffer(const Shape& shape, std::span<const float> values) {
  if (static_cast<std::int64_t>(values.size()) != shape.count()) {
    throw ShapeError("buffer of " + std::to_string(values.size()) +
                     " elements does not fill shape " + shape.to_string());
  }
  return Tensor(shape, std::vector<float>(values.begin(), values.end()));
}

bool Tensor::bit_equal(const Tensor& other) const {
  if (shape_ != other.shape_) return false;
  return std::memcmp(data_.data(), other.data_.data(), bytes()) == 0;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.rank() != 3 || sb.rank() != 3) {
    throw ShapeError("concat_channels requires rank-3 tensors");
  }
  if (sa.height() != sb.height() || sa.width() != sb.width()) {
    throw ShapeError("concat_channels spatial mismatch: " + sa.to_string() + " vs " +
                     sb.to_string());
  }
  Tensor out = Tensor::zeros(Shape{sa.channels() + sb.channels(), sa.height(), sa.width()});
  std::memcpy(out.data(), a.data(), a.bytes());
  std::memcpy(out.data() + a.count(), b.data(), b.bytes());
  return out;
}

}  // namespace tango
