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

#ifndef TANGO_GRAPH_HPP
#define TANGO_GRAPH_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tango/ops.hpp"
#include "tango/profile.hpp"
#include "tango/tensor.hpp"

namespace tango {

enum class NetworkId { cifarnet, alexnet, squeezenet, resnet50, vgg16, lstm, gru };

const char* to_string(NetworkId id);
NetworkId network_from_name(const std::string& name);
std::vector<NetworkId> all_networks();

enum class LayerKind {
  conv,
  pool,
  global_avg_pool,
  relu,
  lrn,
  batchnorm,
  scale,
  eltwise,
  concat,
  fc,
  softmax,
  fire,
  lstm,
  gru,
};

const char* to_string(LayerKind kind);

/// Recorded CUDA-style launch figures carried as descriptive metadata
/// (gridDim, blockDim, registers, shared and constant memory bytes).
struct LaunchMeta {
  std::array<int, 3> grid{1, 1, 1};
  std::array<int, 3> block{1, 1, 1};
  int regs = 0;
  int smem = 0;
  int cmem = 0;
};

struct FcParams {
  int in_features = 0;
  int out_features = 0;
};

struct BatchNormParams {
  int channels = 0;
  float eps = 1e-5f;
};

struct ScaleParams {
  int channels = 0;
};

struct RnnParams {
  RnnKind kind = RnnKind::lstm;
  int input_dim = 1;
  int hidden_dim = 1;
  int steps = 1;
};

using LayerParams = std::variant<std::monostate, ConvParams, PoolParams, LrnParams, FireSpec,
                                 FcParams, BatchNormParams, ScaleParams, RnnParams>;

struct LayerDescriptor {
  std::string name;
  LayerKind kind = LayerKind::relu;
  LayerParams params;
  std::optional<LaunchMeta> launch_meta;

  bool parameterized() const;
};

/// Directed acyclic layer graph with a single source and sink. Eltwise
/// and concat nodes take exactly two predecessors, everything else one
/// (the source reads the network input).
struct NetworkGraph {
  NetworkId id = NetworkId::cifarnet;
  std::vector<LayerDescriptor> nodes;
  std::vector<std::pair<int, int>> edges;  // producer -> consumer indexes
  Shape input_shape;
  int output_len = 0;

  /// Appends a node wired to the given producer indexes; returns its index.
  int add(LayerDescriptor node, const std::vector<int>& inputs);

  int node_index(const std::string& name) const;  // -1 when absent
  std::vector<int> predecessors(int node) const;
  std::vector<int> successors(int node) const;

  /// Structural invariants: unique names, valid edges, single source and
  /// sink, two-input joins only at eltwise/concat, acyclicity.
  void check_structure() const;
};

NetworkGraph build_network(NetworkId id);

/// Producer-before-consumer order, ties broken by declaration order.
std::vector<std::string> topological_schedule(const NetworkGraph& g);
std::vector<int> schedule_indexes(const NetworkGraph& g);

struct ShapeTraceEntry {
  std::string layer;
  std::vector<Shape> inputs;
  Shape output;
};
using ShapeTrace = std::vector<ShapeTraceEntry>;

/// Propagates shapes through the schedule, failing fast with the name of
/// the offending layer; checks the final output length.
ShapeTrace validate_shapes(const NetworkGraph& g, const Shape& input);

struct InferenceResult {
  Tensor output;
  std::vector<ProfileRecord> profile;
  std::uint64_t peak_activation_bytes = 0;
};

struct WeightStore;

/// Executes the schedule, keeping intermediate tensors alive only while
/// a consumer remains. Output is the sink activation (post-softmax where
/// the graph ends in softmax).
InferenceResult run_inference(const NetworkGraph& g, const WeightStore& w, const Tensor& input,
                              ExecContext& ctx);

/// Index of the maximum value, ties toward the lowest index.
int argmax_class(const Tensor& output);

/// JSON description of the topology (nodes, edges, params, launch_meta).
std::string network_to_json(const NetworkGraph& g);

}  // namespace tango

#endif  // TANGO_GRAPH_HPP
