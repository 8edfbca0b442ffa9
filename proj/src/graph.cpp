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

#include "tango/graph.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "tango/error.hpp"

namespace tango {

const char* to_string(NetworkId id) {
  switch (id) {
    case NetworkId::cifarnet: return "cifarnet";
    case NetworkId::alexnet: return "alexnet";
    case NetworkId::squeezenet: return "squeezenet";
    case NetworkId::resnet50: return "resnet50";
    case NetworkId::vgg16: return "vgg16";
    case NetworkId::lstm: return "lstm";
    case NetworkId::gru: return "gru";
  }
  return "?";
}

NetworkId network_from_name(const std::string& name) {
  std::string n;
  n.reserve(name.size());
  for (char c : name) n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (NetworkId id : all_networks()) {
    if (n == to_string(id)) return id;
  }
  throw UsageError("unknown network '" + name +
                   "' (expected cifarnet|alexnet|squeezenet|resnet50|vgg16|lstm|gru)");
}

std::vector<NetworkId> all_networks() {
  return {NetworkId::cifarnet, NetworkId::alexnet, NetworkId::squeezenet,
          NetworkId::resnet50, NetworkId::vgg16,   NetworkId::lstm,
          NetworkId::gru};
}

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::pool: return "pool";
    case LayerKind::global_avg_pool: return "global_avg_pool";
    case LayerKind::relu: return "relu";
    case LayerKind::lrn: return "lrn";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::scale: return "scale";
    case LayerKind::eltwise: return "eltwise";
    case LayerKind::concat: return "concat";
    case LayerKind::fc: return "fc";
    case LayerKind::softmax: return "softmax";
    case LayerKind::fire: return "fire";
    case LayerKind::lstm: return "lstm";
    case LayerKind::gru: return "gru";
  }
  return "?";
}

bool LayerDescriptor::parameterized() const {
  switch (kind) {
    case LayerKind::conv:
    case LayerKind::batchnorm:
    case LayerKind::scale:
    case LayerKind::fc:
    case LayerKind::fire:
    case LayerKind::lstm:
    case LayerKind::gru:
      return true;
    default:
      return false;
  }
}

int NetworkGraph::add(LayerDescriptor node, const std::vector<int>& inputs) {
  const int idx = static_cast<int>(nodes.size());
  nodes.push_back(std::move(node));
  for (int p : inputs) edges.emplace_back(p, idx);
  return idx;
}

int NetworkGraph::node_index(const std::string& name) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> NetworkGraph::predecessors(int node) const {
  std::vector<int> out;
  for (const auto& [from, to] : edges) {
    if (to == node) out.push_back(from);
  }
  return out;
}

std::vector<int> NetworkGraph::successors(int node) const {
  std::vector<int> out;
  for (const auto& [from, to] : edges) {
    if (from == node) out.push_back(to);
  }
  return out;
}

void NetworkGraph::check_structure() const {
  if (nodes.empty()) throw GraphError("graph has no nodes");
  std::set<std::string> names;
  for (const auto& n : nodes) {
    if (!names.insert(n.name).second) throw GraphError("duplicate layer name '" + n.name + "'");
  }
  const int count = static_cast<int>(nodes.size());
  for (const auto& [from, to] : edges) {
    if (from < 0 || from >= count || to < 0 || to >= count) {
      throw GraphError("edge references a node outside the graph");
    }
  }
  int sources = 0, sinks = 0;
  for (int i = 0; i < count; ++i) {
    const auto preds = predecessors(i);
    const bool join = nodes[static_cast<std::size_t>(i)].kind == LayerKind::eltwise ||
                      nodes[static_cast<std::size_t>(i)].kind == LayerKind::concat;
    if (preds.empty()) {
      ++sources;
    } else if (join) {
      if (preds.size() != 2) {
        throw GraphError("layer '" + nodes[static_cast<std::size_t>(i)].name +
                         "' needs exactly two inputs");
      }
    } else if (preds.size() != 1) {
      throw GraphError("layer '" + nodes[static_cast<std::size_t>(i)].name +
                       "' needs exactly one input");
    }
    if (successors(i).empty()) ++sinks;
  }
  if (sources != 1) throw GraphError("graph must have exactly one source node");
  if (sinks != 1) throw GraphError("graph must have exactly one sink node");
  schedule_indexes(*this);  // throws on cycles
}

std::vector<int> schedule_indexes(const NetworkGraph& g) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  for (const auto& [from, to] : g.edges) {
    (void)from;
    ++indegree[static_cast<std::size_t>(to)];
  }
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n));
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  for (int emitted = 0; emitted < n; ++emitted) {
    int pick = -1;
    for (int i = 0; i < n; ++i) {
      if (!done[static_cast<std::size_t>(i)] && indegree[static_cast<std::size_t>(i)] == 0) {
        pick = i;  // lowest declaration index first
        break;
      }
    }
    if (pick < 0) throw GraphError("cycle detected in layer graph");
    done[static_cast<std::size_t>(pick)] = true;
    order.push_back(pick);
    for (const auto& [from, to] : g.edges) {
      if (from == pick) --indegree[static_cast<std::size_t>(to)];
    }
  }
  return order;
}

std::vector<std::string> topological_schedule(const NetworkGraph& g) {
  std::vector<std::string> names;
  for (int i : schedule_indexes(g)) names.push_back(g.nodes[static_cast<std::size_t>(i)].name);
  return names;
}

namespace {

Shape layer_output_shape(const LayerDescriptor& node, const std::vector<Shape>& in) {
  const auto fail = [&](const std::string& why) -> ShapeError {
    return ShapeError("layer '" + node.name + "': " + why);
  };
  const auto want_rank3 = [&](const Shape& s) {
    if (s.rank() != 3) throw fail("expected a rank-3 input, got " + s.to_string());
  };

  switch (node.kind) {
    case LayerKind::conv: {
      const auto& p = std::get<ConvParams>(node.params);
      want_rank3(in[0]);
      if (in[0].channels() != p.in_channels) {
        throw fail("expects " + std::to_string(p.in_channels) + " channels, got " +
                   in[0].to_string());
      }
      const int ho = conv_output_extent(in[0].height(), p.kernel_h, p.stride, p.pad);
      const int wo = conv_output_extent(in[0].width(), p.kernel_w, p.stride, p.pad);
      if (ho < 1 || wo < 1) throw fail("output extent is not positive for " + in[0].to_string());
      return Shape{p.out_channels, ho, wo};
    }
    case LayerKind::pool: {
      const auto& p = std::get<PoolParams>(node.params);
      want_rank3(in[0]);
      if (p.window > in[0].height() || p.window > in[0].width()) {
        throw fail("pool window larger than input " + in[0].to_string());
      }
      return Shape{in[0].channels(), pool_output_extent(in[0].height(), p.window, p.stride),
                   pool_output_extent(in[0].width(), p.window, p.stride)};
    }
    case LayerKind::global_avg_pool:
      want_rank3(in[0]);
      return Shape{in[0].channels()};
    case LayerKind::relu:
    case LayerKind::softmax:
      return in[0];
    case LayerKind::lrn:
      want_rank3(in[0]);
      return in[0];
    case LayerKind::batchnorm: {
      want_rank3(in[0]);
      if (in[0].channels() != std::get<BatchNormParams>(node.params).channels) {
        throw fail("batchnorm channel mismatch for " + in[0].to_string());
      }
      return in[0];
    }
    case LayerKind::scale: {
      want_rank3(in[0]);
      if (in[0].channels() != std::get<ScaleParams>(node.params).channels) {
        throw fail("scale channel mismatch for " + in[0].to_string());
      }
      return in[0];
    }
    case LayerKind::eltwise:
      if (in[0] != in[1]) {
        throw fail("eltwise inputs differ: " + in[0].to_string() + " vs " + in[1].to_string());
      }
      return in[0];
    case LayerKind::concat: {
      want_rank3(in[0]);
      want_rank3(in[1]);
      if (in[0].height() != in[1].height() || in[0].width() != in[1].width()) {
        throw fail("concat spatial mismatch");
      }
      return Shape{in[0].channels() + in[1].channels(), in[0].height(), in[0].width()};
    }
    case LayerKind::fc: {
      const auto& p = std::get<FcParams>(node.params);
      if (in[0].count() != p.in_features) {
        throw fail("expects " + std::to_string(p.in_features) + " inputs, got " +
                   in[0].to_string());
      }
      return Shape{p.out_features};
    }
    case LayerKind::fire: {
      const auto& f = std::get<FireSpec>(node.params);
      want_rank3(in[0]);
      if (in[0].channels() != f.squeeze.in_channels) {
        throw fail("fire expects " + std::to_string(f.squeeze.in_channels) + " channels, got " +
                   in[0].to_string());
      }
      return Shape{f.expand1x1.out_channels + f.expand3x3.out_channels, in[0].height(),
                   in[0].width()};
    }
    case LayerKind::lstm:
    case LayerKind::gru: {
      const auto& p = std::get<RnnParams>(node.params);
      if (in[0].count() != static_cast<std::int64_t>(p.steps) * p.input_dim) {
        throw fail("sequence of " + std::to_string(p.steps) + "x" + std::to_string(p.input_dim) +
                   " values expected, got " + in[0].to_string());
      }
      return Shape{p.hidden_dim};
    }
  }
  throw fail("unhandled layer kind");
}

}  // namespace

ShapeTrace validate_shapes(const NetworkGraph& g, const Shape& input) {
  g.check_structure();
  const auto order = schedule_indexes(g);
  std::vector<Shape> out_shapes(g.nodes.size());
  ShapeTrace trace;
  trace.reserve(g.nodes.size());
  for (int idx : order) {
    const auto& node = g.nodes[static_cast<std::size_t>(idx)];
    std::vector<Shape> ins;
    const auto preds = g.predecessors(idx);
    if (preds.empty()) {
      ins.push_back(input);
    } else {
      for (int p : preds) ins.push_back(out_shapes[static_cast<std::size_t>(p)]);
    }
    const Shape out = layer_output_shape(node, ins);
    out_shapes[static_cast<std::size_t>(idx)] = out;
    trace.push_back({node.name, std::move(ins), out});
  }
  const Shape& last = trace.back().output;
  if (last.count() != g.output_len) {
    throw ShapeError("network output has " + std::to_string(last.count()) +
                     " values, expected " + std::to_string(g.output_len));
  }
  return trace;
}

int argmax_class(const Tensor& output) {
  if (output.count() < 1) throw ShapeError("argmax_class needs at least one value");
  int best = 0;
  for (std::int64_t i = 1; i < output.count(); ++i) {
    if (output[i] > output[best]) best = static_cast<int>(i);
  }
  return best;
}

namespace {

nlohmann::ordered_json params_to_json(const LayerDescriptor& node) {
  nlohmann::ordered_json j;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConvParams>) {
          j = {{"in_channels", p.in_channels}, {"out_channels", p.out_channels},
               {"kernel_h", p.kernel_h},       {"kernel_w", p.kernel_w},
               {"stride", p.stride},           {"pad", p.pad},
               {"groups", p.groups}};
        } else if constexpr (std::is_same_v<T, PoolParams>) {
          j = {{"window", p.window},
               {"stride", p.stride},
               {"mode", p.mode == PoolMode::max ? "max" : "average"}};
        } else if constexpr (std::is_same_v<T, LrnParams>) {
          j = {{"local_size", p.local_size}, {"k", p.k}, {"alpha", p.alpha}, {"beta", p.beta}};
        } else if constexpr (std::is_same_v<T, FireSpec>) {
          j = {{"in_channels", p.squeeze.in_channels},
               {"squeeze_channels", p.squeeze.out_channels},
               {"expand1x1_channels", p.expand1x1.out_channels},
               {"expand3x3_channels", p.expand3x3.out_channels}};
        } else if constexpr (std::is_same_v<T, FcParams>) {
          j = {{"in_features", p.in_features}, {"out_features", p.out_features}};
        } else if constexpr (std::is_same_v<T, BatchNormParams>) {
          j = {{"channels", p.channels}, {"eps", p.eps}};
        } else if constexpr (std::is_same_v<T, ScaleParams>) {
          j = {{"channels", p.channels}};
        } else if constexpr (std::is_same_v<T, RnnParams>) {
          j = {{"cell", p.kind == RnnKind::lstm ? "lstm" : "gru"},
               {"input_dim", p.input_dim},
               {"hidden_dim", p.hidden_dim},
               {"steps", p.steps}};
        }
      },
      node.params);
  return j;
}

}  // namespace

std::string network_to_json(const NetworkGraph& g) {
  nlohmann::ordered_json j;
  j["network"] = to_string(g.id);
  j["input_shape"] = g.input_shape.dims();
  j["output_len"] = g.output_len;
  j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& node : g.nodes) {
    nlohmann::ordered_json n;
    n["name"] = node.name;
    n["kind"] = to_string(node.kind);
    if (!std::holds_alternative<std::monostate>(node.params)) n["params"] = params_to_json(node);
    if (node.launch_meta) {
      const auto& m = *node.launch_meta;
      n["launch_meta"] = {{"grid", m.grid},   {"block", m.block}, {"regs", m.regs},
                          {"smem", m.smem},   {"cmem", m.cmem}};
    }
    j["nodes"].push_back(std::move(n));
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& [from, to] : g.edges) {
    j["edges"].push_back({g.nodes[static_cast<std::size_t>(from)].name,
                          g.nodes[static_cast<std::size_t>(to)].name});
  }
  return j.dump(2);
}

}  // namespace tango
