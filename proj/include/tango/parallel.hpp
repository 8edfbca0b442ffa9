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

#ifndef TANGO_PARALLEL_HPP
#define TANGO_PARALLEL_HPP

#include <cstdint>
#include <functional>

namespace tango {

/// Deterministic data-parallel driver. The index range [0, n) is split
/// into `workers` contiguous chunks with fixed boundaries, so every
/// output element is produced by exactly one worker and results are
/// bit-identical for any worker count.
class WorkerPool {
 public:
  explicit WorkerPool(int workers);

  int workers() const { return workers_; }

  /// f(begin, end, worker_index) runs once per non-empty chunk.
  void for_chunks(std::int64_t n,
                  const std::function<void(std::int64_t, std::int64_t, int)>& f) const;

 private:
  int workers_;
};

}  // namespace tango

#endif  // TANGO_PARALLEL_HPP
