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

#include "tango/parallel.hpp"

#include <thread>
#include <vector>

#include "tango/error.hpp"

namespace tango {

WorkerPool::WorkerPool(int workers) : workers_(workers) {
  if (workers < 1) throw UsageError("worker count must be >= 1");
}

void WorkerPool::for_chunks(
    std::int64_t n, const std::function<void(std::int64_t, std::int64_t, int)>& f) const {
  if (n <= 0) return;
  // Chunk boundaries depend only on (n, workers); small ranges stay serial.
  if (workers_ == 1 || n < 2 * workers_) {
    f(0, n, 0);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers_ - 1));
  for (int w = 1; w < workers_; ++w) {
    const std::int64_t begin = n * w / workers_;
    const std::int64_t end = n * (w + 1) / workers_;
    if (begin < end) threads.emplace_back([&f, begin, end, w] { f(begin, end, w); });
  }
  f(0, n / workers_, 0);
  for (auto& t : threads) t.join();
}

}  // namespace tango
