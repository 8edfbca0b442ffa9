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

#include "tango/weights.hpp"

#include <bit>
#include <fstream>
#include <set>

#include <json.hpp>

#include "tango/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "weight files are little-endian float32; big-endian hosts need a swap path");

namespace tango {

namespace {

std::int64_t dims_count(const std::vector<int>& dims) {
  std::int64_t n = 1;
  for (int d : dims) n *= d;
  return n;
}

// In-memory shape for a semantic dim list: rank > 3 folds the trailing
// extents (conv filters become Cout x rest).
Shape fold_dims(const std::vector<int>& dims) {
  if (dims.size() <= 3) return Shape(dims);
  std::int64_t rest = 1;
  for (std::size_t i = 1; i < dims.size(); ++i) rest *= dims[i];
  return Shape{dims[0], static_cast<int>(rest)};
}

std::vector<std::pair<std::string, std::vector<int>>> conv_arrays(const ConvParams& p,
                                                                  const std::string& prefix) {
  return {{prefix + "weights",
           {p.out_channels, p.in_channels / p.groups, p.kernel_h, p.kernel_w}},
          {prefix + "bias", {p.out_channels}}};
}

std::vector<std::pair<std::string, std::vector<int>>> rnn_arrays(const RnnParams& p) {
  const std::vector<std::string> gates =
      p.kind == RnnKind::lstm ? std::vector<std::string>{"i", "f", "o", "g"}
                              : std::vector<std::string>{"z", "r", "h"};
  std::vector<std::pair<std::string, std::vector<int>>> out;
  for (const auto& gate : gates) {
    out.push_back({"w_" + gate, {p.hidden_dim, p.input_dim}});
    out.push_back({"u_" + gate, {p.hidden_dim, p.hidden_dim}});
    out.push_back({"b_" + gate, {p.hidden_dim}});
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::vector<int>>> expected_arrays(
    const LayerDescriptor& node) {
  switch (node.kind) {
    case LayerKind::conv:
      return conv_arrays(std::get<ConvParams>(node.params), "");
    case LayerKind::fire: {
      const auto& f = std::get<FireSpec>(node.params);
      auto out = conv_arrays(f.squeeze, "squeeze_");
      for (auto& a : conv_arrays(f.expand1x1, "expand1x1_")) out.push_back(std::move(a));
      for (auto& a : conv_arrays(f.expand3x3, "expand3x3_")) out.push_back(std::move(a));
      return out;
    }
    case LayerKind::fc: {
      const auto& p = std::get<FcParams>(node.params);
      return {{"weights", {p.out_features, p.in_features}}, {"bias", {p.out_features}}};
    }
    case LayerKind::batchnorm: {
      const int c = std::get<BatchNormParams>(node.params).channels;
      return {{"mean", {c}}, {"variance", {c}}};
    }
    case LayerKind::scale: {
      const int c = std::get<ScaleParams>(node.params).channels;
      return {{"gamma", {c}}, {"beta", {c}}};
    }
    case LayerKind::lstm:
    case LayerKind::gru:
      return rnn_arrays(std::get<RnnParams>(node.params));
    default:
      return {};
  }
}

std::int64_t WeightArray::element_count() const { return dims_count(dims); }

const Tensor& WeightBlob::array(const std::string& role) const {
  for (const auto& a : arrays) {
    if (a.role == role) return a.tensor;
  }
  throw WeightError("layer '" + layer + "' has no weight array '" + role + "'");
}

std::int64_t WeightBlob::element_count() const {
  std::int64_t n = 0;
  for (const auto& a : arrays) n += a.element_count();
  return n;
}

const WeightBlob* WeightStore::find(const std::string& layer) const {
  for (const auto& b : blobs) {
    if (b.layer == layer) return &b;
  }
  return nullptr;
}

const WeightBlob& WeightStore::blob(const std::string& layer) const {
  if (const WeightBlob* b = find(layer)) return *b;
  throw WeightError("weight store has no blob for layer '" + layer + "'");
}

std::int64_t WeightStore::total_elements() const {
  std::int64_t n = 0;
  for (const auto& b : blobs) n += b.element_count();
  return n;
}

ParameterCount count_parameters(const NetworkGraph& g) {
  ParameterCount out;
  for (const auto& node : g.nodes) {
    if (!node.parameterized()) continue;
    std::int64_t n = 0;
    for (const auto& [role, dims] : expected_arrays(node)) {
      (void)role;
      n += dims_count(dims);
    }
    out.per_layer.emplace_back(node.name, n);
    out.total += n;
  }
  return out;
}

WeightStore generate_synthetic(const NetworkGraph& g, std::uint64_t seed) {
  WeightStore store;
  store.network = to_string(g.id);
  store.provenance = Provenance::synthetic;
  store.seed = seed;
  SplitMix64 rng(seed);
  for (const auto& node : g.nodes) {
    if (!node.parameterized()) continue;
    WeightBlob blob;
    blob.layer = node.name;
    blob.kind = node.kind;
    for (const auto& [role, dims] : expected_arrays(node)) {
      const std::int64_t count = dims_count(dims);
      std::vector<float> values(static_cast<std::size_t>(count));
      // Variances stay positive; everything else is small and centered so
      // activations remain finite through the deepest network.
      const bool is_var = role == "variance";
      const float lo = is_var ? 0.5f : -0.05f;
      const float hi = is_var ? 1.5f : 0.05f;
      for (auto& v : values) v = rng.uniform(lo, hi);
      blob.arrays.push_back({role, dims, Tensor::from_buffer(fold_dims(dims), values)});
    }
    store.blobs.push_back(std::move(blob));
  }
  return store;
}

Manifest write_store(const WeightStore& store, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw PersistenceError("cannot create directory " + dir.string() + ": " + ec.message());

  Manifest manifest;
  manifest.network = store.network;
  manifest.version = kManifestVersion;

  nlohmann::ordered_json j;
  j["network"] = store.network;
  j["version"] = kManifestVersion;
  j["layers"] = nlohmann::ordered_json::array();

  for (const auto& blob : store.blobs) {
    ManifestEntry entry;
    entry.layer = blob.layer;
    entry.file = blob.layer + ".bin";

    const auto path = dir / entry.file;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw PersistenceError("cannot open " + path.string() + " for writing");

    nlohmann::ordered_json jarrays = nlohmann::ordered_json::array();
    std::uint64_t offset = 0;
    for (const auto& a : blob.arrays) {
      out.write(reinterpret_cast<const char*>(a.tensor.data()),
                static_cast<std::streamsize>(a.tensor.bytes()));
      jarrays.push_back({{"role", a.role}, {"shape", a.dims}, {"offset", offset}});
      entry.arrays.push_back({a.role, a.dims, offset});
      offset += a.tensor.bytes();
    }
    if (!out) throw PersistenceError("write failed for " + path.string());
    out.close();

    j["layers"].push_back(
        {{"name", entry.layer}, {"file", entry.file}, {"arrays", std::move(jarrays)}});
    manifest.layers.push_back(std::move(entry));
  }

  const auto manifest_path = dir / kManifestFileName;
  std::ofstream mf(manifest_path, std::ios::binary | std::ios::trunc);
  if (!mf) throw PersistenceError("cannot open " + manifest_path.string() + " for writing");
  mf << j.dump(2) << '\n';
  if (!mf) throw PersistenceError("write failed for " + manifest_path.string());
  return manifest;
}

WeightStore load_store(const std::filesystem::path& manifest_path, const NetworkGraph& g) {
  std::ifstream mf(manifest_path, std::ios::binary);
  if (!mf) throw PersistenceError("cannot open manifest " + manifest_path.string());
  nlohmann::json j;
  try {
    mf >> j;
  } catch (const nlohmann::json::exception& e) {
    throw PersistenceError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }

  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != kManifestVersion) {
    throw PersistenceError("unsupported manifest version in " + manifest_path.string());
  }
  const std::string network = j.value("network", "");
  if (network != to_string(g.id)) {
    throw WeightError("manifest is for network '" + network + "', graph is '" +
                      std::string(to_string(g.id)) + "'");
  }

  struct RawEntry {
    std::string file;
    std::vector<ManifestArray> arrays;
  };
  std::vector<std::pair<std::string, RawEntry>> entries;
  for (const auto& layer : j.at("layers")) {
    RawEntry e;
    e.file = layer.at("file").get<std::string>();
    for (const auto& a : layer.at("arrays")) {
      ManifestArray ma;
      ma.role = a.at("role").get<std::string>();
      ma.dims = a.at("shape").get<std::vector<int>>();
      ma.offset = a.value("offset", std::uint64_t{0});
      e.arrays.push_back(std::move(ma));
    }
    entries.emplace_back(layer.at("name").get<std::string>(), std::move(e));
  }

  const auto dir = manifest_path.parent_path();
  WeightStore store;
  store.network = network;
  store.provenance = Provenance::imported;
  store.source = manifest_path.string();

  std::set<std::string> consumed;
  for (const auto& node : g.nodes) {
    if (!node.parameterized()) continue;
    const RawEntry* entry = nullptr;
    for (const auto& [name, e] : entries) {
      if (name == node.name) {
        entry = &e;
        break;
      }
    }
    if (!entry) {
      throw PersistenceError("manifest has no weight file for layer '" + node.name + "'");
    }
    consumed.insert(node.name);

    const auto expected = expected_arrays(node);
    if (entry->arrays.size() != expected.size()) {
      throw WeightError("layer '" + node.name + "': manifest declares " +
                        std::to_string(entry->arrays.size()) + " arrays, expected " +
                        std::to_string(expected.size()));
    }
    std::uint64_t expected_bytes = 0;
    std::uint64_t offset = 0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const auto& [role, dims] = expected[i];
      const auto& got = entry->arrays[i];
      if (got.role != role || got.dims != dims) {
        throw WeightError("layer '" + node.name + "': array " + std::to_string(i) + " is '" +
                          got.role + "', expected '" + role + "' with matching shape");
      }
      if (got.offset != offset) {
        throw WeightError("layer '" + node.name + "': array '" + role +
                          "' offset does not match the declared order");
      }
      offset += static_cast<std::uint64_t>(dims_count(dims)) * sizeof(float);
      expected_bytes = offset;
    }

    const auto path = dir / entry->file;
    std::error_code ec;
    const auto on_disk = std::filesystem::file_size(path, ec);
    if (ec) throw PersistenceError("missing weight file " + path.string() + " for layer '" +
                                   node.name + "'");
    if (on_disk != expected_bytes) {
      throw WeightError("layer '" + node.name + "': weight file " + path.string() + " holds " +
                        std::to_string(on_disk) + " bytes, expected " +
                        std::to_string(expected_bytes));
    }

    std::ifstream in(path, std::ios::binary);
    if (!in) throw PersistenceError("cannot open weight file " + path.string());
    WeightBlob blob;
    blob.layer = node.name;
    blob.kind = node.kind;
    for (const auto& [role, dims] : expected) {
      const std::int64_t count = dims_count(dims);
      std::vector<float> values(static_cast<std::size_t>(count));
      in.read(reinterpret_cast<char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
      if (!in) throw PersistenceError("short read from " + path.string());
      blob.arrays.push_back({role, dims, Tensor::from_buffer(fold_dims(dims), values)});
    }
    store.blobs.push_back(std::move(blob));
  }

  for (const auto& [name, e] : entries) {
    (void)e;
    if (!consumed.count(name)) {
      throw WeightError("manifest carries an orphan blob '" + name +
                        "' that no parameterized layer uses");
    }
  }
  return store;
}

}  // namespace tango
