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

#ifndef TANGO_ERROR_HPP
#define TANGO_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tango {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Tensor extents do not line up (bad dims, mismatched buffers, ...).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Coordinate outside a tensor's index domain.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Numerically invalid data (e.g. negative variance).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed network graph (cycle, dangling edge, duplicate name).
class GraphError : public Error {
 public:
  using Error::Error;
};

/// Weight blob missing or not conforming to its layer.
class WeightError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or format failure while reading/writing a weight store.
class PersistenceError : public Error {
 public:
  using Error::Error;
};

/// Bad runtime input (wrong image size, wrong price arity, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Misuse of a reporting entry point (unknown format, empty input).
class ReportError : public Error {
 public:
  using Error::Error;
};

/// Bad command-line or config-file usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace tango

#endif  // TANGO_ERROR_HPP
