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

#ifndef TANGO_WEIGHTS_HPP
#define TANGO_WEIGHTS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tango/graph.hpp"
#include "tango/tensor.hpp"

namespace tango {

/// One named array inside a layer's weight blob. `dims` carries the
/// semantic extents (conv filters are 4-D); in memory the values live in
/// a tensor with trailing dims folded so ranks stay within 3.
struct WeightArray {
  std::string role;  // "weights", "bias", "mean", "w_i", ...
  std::vector<int> dims;
  Tensor tensor;

  std::int64_t element_count() const;
};

struct WeightBlob {
  std::string layer;
  LayerKind kind = LayerKind::conv;
  std::vector<WeightArray> arrays;

  const Tensor& array(const std::string& role) const;
  std::int64_t element_count() const;
};

enum class Provenance { synthetic, imported };

/// Per-layer weights for exactly one network's parameterized layers,
/// in graph declaration order. Immutable once assembled.
struct WeightStore {
  std::string network;
  Provenance provenance = Provenance::synthetic;
  std::uint64_t seed = 0;        // when synthetic
  std::string source;            // manifest path when imported
  std::vector<WeightBlob> blobs;

  const WeightBlob* find(const std::string& layer) const;
  const WeightBlob& blob(const std::string& layer) const;  // WeightError when absent
  std::int64_t total_elements() const;
};

struct ManifestArray {
  std::string role;
  std::vector<int> dims;
  std::uint64_t offset = 0;  // byte offset inside the layer file
};

struct ManifestEntry {
  std::string layer;
  std::string file;
  std::vector<ManifestArray> arrays;
};

/// On-disk index of a weight store: JSON next to one raw little-endian
/// float32 file per layer, arrays concatenated in declared order.
struct Manifest {
  std::string network;
  int version = 1;
  std::vector<ManifestEntry> layers;
};

inline constexpr int kManifestVersion = 1;
inline constexpr const char* kManifestFileName = "manifest.json";

/// The arrays (role + semantic dims) a layer's blob must provide.
std::vector<std::pair<std::string, std::vector<int>>> expected_arrays(const LayerDescriptor& node);

struct ParameterCount {
  std::vector<std::pair<std::string, std::int64_t>> per_layer;
  std::int64_t total = 0;
};

/// Analytic parameter count from layer dimensions (conv:
/// Cout*(Cin/groups)*Kh*Kw + Cout, fc: M*N + M, RNN gates summed, plus
/// batchnorm statistics and scale parameters).
ParameterCount count_parameters(const NetworkGraph& g);

/// Deterministic SplitMix64-driven store: uniform values in
/// [-0.05, 0.05], batchnorm variances in [0.5, 1.5]. The stream depends
/// only on the seed and the sequence of array extents.
WeightStore generate_synthetic(const NetworkGraph& g, std::uint64_t seed);

Manifest write_store(const WeightStore& store, const std::filesystem::path& dir);
WeightStore load_store(const std::filesystem::path& manifest_path, const NetworkGraph& g);

/// Deterministic 64-bit generator (public domain SplitMix64 constants).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform on a 2^24-step grid over [lo, hi); exact in float.
  float uniform(float lo, float hi) {
    const auto bits = static_cast<std::uint32_t>(next() >> 40);
    const float u = static_cast<float>(bits) * (1.0f / 16777216.0f);
    return lo + u * (hi - lo);
  }

 private:
  std::uint64_t state_;
};

}  // namespace tango

#endif  // TANGO_WEIGHTS_HPP
