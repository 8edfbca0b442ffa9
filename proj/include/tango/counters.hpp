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

#ifndef TANGO_COUNTERS_HPP
#define TANGO_COUNTERS_HPP

#include <array>
#include <cstdint>
#include <string>

#include "tango/parallel.hpp"

namespace tango {

/// Semantic operation categories tallied by every kernel. One counter
/// increment per scalar operation of that category. `load`/`store`
/// record 4-byte data accesses and are kept out of the arithmetic
/// shares; address/index arithmetic is deliberately not counted.
///
/// Conventions used across the kernels:
///   - a multiply feeding an accumulate is one `mad` (never mul+add)
///   - a bias term folded into an accumulator is one `add`
///   - comparisons (max pooling, relu, argmax scans) are `max_cmp`
///   - exp/tanh/pow/sqrt evaluations are one `exp_tanh` each; a sigmoid
///     decomposes into exp_tanh + add + div
enum class OpCategory : int {
  add = 0,
  mul,
  mad,
  max_cmp,
  div,
  exp_tanh,
  load,
  store,
};

inline constexpr int kOpCategoryCount = 8;
inline constexpr std::array<OpCategory, kOpCategoryCount> kAllOpCategories = {
    OpCategory::add,     OpCategory::mul, OpCategory::mad,      OpCategory::max_cmp,
    OpCategory::div,     OpCategory::exp_tanh, OpCategory::load, OpCategory::store,
};

const char* to_string(OpCategory c);

struct OpCounters {
  std::array<std::uint64_t, kOpCategoryCount> v{};

  std::uint64_t& operator[](OpCategory c) { return v[static_cast<int>(c)]; }
  std::uint64_t operator[](OpCategory c) const { return v[static_cast<int>(c)]; }

  OpCounters& operator+=(const OpCounters& o) {
    for (int i = 0; i < kOpCategoryCount; ++i) v[static_cast<std::size_t>(i)] += o.v[static_cast<std::size_t>(i)];
    return *this;
  }

  /// Total over {add, mul, mad, max_cmp, div, exp_tanh}.
  std::uint64_t arithmetic_total() const {
    std::uint64_t t = 0;
    for (int i = 0; i < kOpCategoryCount; ++i) {
      const auto c = static_cast<OpCategory>(i);
      if (c != OpCategory::load && c != OpCategory::store) t += v[static_cast<std::size_t>(i)];
    }
    return t;
  }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto x : v) t += x;
    return t;
  }

  bool operator==(const OpCounters&) const = default;
};

/// Execution environment handed to every kernel: the worker pool and the
/// counter accumulator the kernel charges its operations to. Per-worker
/// tallies are merged into `counters` in worker order.
struct ExecContext {
  explicit ExecContext(int workers = 1) : pool(workers) {}

  WorkerPool pool;
  OpCounters counters;
};

}  // namespace tango

#endif  // TANGO_COUNTERS_HPP
