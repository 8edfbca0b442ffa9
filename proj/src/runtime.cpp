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

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "tango/error.hpp"
#include "tango/graph.hpp"
#include "tango/weights.hpp"

namespace tango {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t ns_since(Clock::time_point t0) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
}

OpCounters counters_since(const OpCounters& now, const OpCounters& before) {
  OpCounters d;
  for (int i = 0; i < kOpCategoryCount; ++i) {
    d.v[static_cast<std::size_t>(i)] =
        now.v[static_cast<std::size_t>(i)] - before.v[static_cast<std::size_t>(i)];
  }
  return d;
}

const char* record_type(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::pool:
    case LayerKind::global_avg_pool: return "pool";
    case LayerKind::relu: return "relu";
    case LayerKind::lrn: return "norm";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::scale: return "scale";
    case LayerKind::eltwise: return "eltwise";
    case LayerKind::concat: return "concat";
    case LayerKind::fc: return "fc";
    case LayerKind::softmax: return "softmax";
    case LayerKind::lstm:
    case LayerKind::gru: return "rnn_cell";
    case LayerKind::fire: return "fire";  // sub-stages carry their own types
  }
  return "?";
}

struct NodeBinding {
  const WeightBlob* blob = nullptr;
  RnnCellWeights rnn;
};

// Validates that the store provides a conforming blob for every
// parameterized layer and pre-assembles the RNN weight views, so nothing
// weight-related allocates inside the accounted activation scope.
std::vector<NodeBinding> bind_weights(const NetworkGraph& g, const WeightStore& store) {
  std::vector<NodeBinding> bindings(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& node = g.nodes[i];
    if (!node.parameterized()) continue;
    const WeightBlob* blob = store.find(node.name);
    if (!blob) throw WeightError("no weight blob for layer '" + node.name + "'");
    const auto expected = expected_arrays(node);
    if (blob->arrays.size() != expected.size()) {
      throw WeightError("layer '" + node.name + "': blob has " +
                        std::to_string(blob->arrays.size()) + " arrays, expected " +
                        std::to_string(expected.size()));
    }
    for (std::size_t a = 0; a < expected.size(); ++a) {
      const auto& got = blob->arrays[a];
      if (got.role != expected[a].first || got.dims != expected[a].second ||
          got.tensor.count() != got.element_count()) {
        throw WeightError("layer '" + node.name + "': weight array '" + got.role +
                          "' does not conform");
      }
    }
    bindings[i].blob = blob;
    if (node.kind == LayerKind::lstm || node.kind == LayerKind::gru) {
      const auto& p = std::get<RnnParams>(node.params);
      RnnCellWeights w;
      w.kind = p.kind;
      w.input_dim = p.input_dim;
      w.hidden_dim = p.hidden_dim;
      const std::vector<std::string> gates = p.kind == RnnKind::lstm
                                                 ? std::vector<std::string>{"i", "f", "o", "g"}
                                                 : std::vector<std::string>{"z", "r", "h"};
      for (const auto& gate : gates) {
        w.gates.push_back({blob->array("w_" + gate), blob->array("u_" + gate),
                           blob->array("b_" + gate)});
      }
      w.validate();
      bindings[i].rnn = std::move(w);
    }
  }
  return bindings;
}

Tensor run_rnn_node(const LayerDescriptor& node, const RnnCellWeights& w, const Tensor& input,
                    ExecContext& ctx) {
  const auto& p = std::get<RnnParams>(node.params);
  std::vector<float> h(static_cast<std::size_t>(p.hidden_dim), 0.0f);
  std::vector<float> cell(h), h_next(h), c_next(h);
  std::vector<float> x(static_cast<std::size_t>(p.input_dim));
  for (int t = 0; t < p.steps; ++t) {
    for (int d = 0; d < p.input_dim; ++d) {
      x[static_cast<std::size_t>(d)] = input[static_cast<std::int64_t>(t) * p.input_dim + d];
    }
    if (p.kind == RnnKind::lstm) {
      detail::lstm_step(x.data(), h.data(), cell.data(), w, h_next.data(), c_next.data(), ctx);
      cell.swap(c_next);
    } else {
      detail::gru_step(x.data(), h.data(), w, h_next.data(), ctx);
    }
    h.swap(h_next);
  }
  return Tensor::from_buffer(Shape{p.hidden_dim}, h);
}

}  // namespace

InferenceResult run_inference(const NetworkGraph& g, const WeightStore& w, const Tensor& input,
                              ExecContext& ctx) {
  validate_shapes(g, input.shape());
  const auto order = schedule_indexes(g);
  const auto bindings = bind_weights(g, w);

  std::vector<int> refcount(g.nodes.size(), 0);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    refcount[i] = static_cast<int>(g.successors(static_cast<int>(i)).size());
  }

  InferenceResult result;
  result.profile.reserve(g.nodes.size());
  std::vector<std::optional<Tensor>> outs(g.nodes.size());

  MemoryAccountant accountant;
  {
    AccountantScope scope(accountant);
    accountant.on_alloc(input.bytes());
    bool input_live = true;

    for (int idx : order) {
      const auto& node = g.nodes[static_cast<std::size_t>(idx)];
      const auto preds = g.predecessors(idx);
      std::vector<const Tensor*> ins;
      if (preds.empty()) {
        ins.push_back(&input);
      } else {
        for (int p : preds) ins.push_back(&*outs[static_cast<std::size_t>(p)]);
      }

      const auto release_inputs = [&] {
        if (preds.empty()) {
          if (input_live) accountant.on_free(input.bytes());
          input_live = false;
          return;
        }
        for (int p : preds) {
          if (--refcount[static_cast<std::size_t>(p)] == 0) {
            outs[static_cast<std::size_t>(p)].reset();
          }
        }
      };

      const auto emit = [&](const std::string& name, const char* type, Clock::time_point t0,
                            const OpCounters& before) {
        ProfileRecord rec;
        rec.layer = name;
        rec.type = type;
        rec.wall_ns = ns_since(t0);
        rec.counters = counters_since(ctx.counters, before);
        rec.bytes_read = 4 * rec.counters[OpCategory::load];
        rec.bytes_written = 4 * rec.counters[OpCategory::store];
        result.profile.push_back(std::move(rec));
      };

      const WeightBlob* blob = bindings[static_cast<std::size_t>(idx)].blob;
      Tensor out;

      if (node.kind == LayerKind::fire) {
        const auto& f = std::get<FireSpec>(node.params);
        const Tensor& fin = *ins[0];
        const int h = fin.shape().height();
        const int wdt = fin.shape().width();

        auto before = ctx.counters;
        auto t0 = Clock::now();
        Tensor squeezed = Tensor::zeros(Shape{f.squeeze.out_channels, h, wdt});
        detail::conv2d_into(fin, blob->array("squeeze_weights"), blob->array("squeeze_bias"),
                            f.squeeze, /*fuse_relu=*/true, 0, squeezed, ctx);
        emit(node.name + "_squeeze1x1", "fire_squeeze", t0, before);
        release_inputs();  // only the squeeze stage reads the fire input

        before = ctx.counters;
        t0 = Clock::now();
        out = Tensor::zeros(Shape{f.expand1x1.out_channels + f.expand3x3.out_channels, h, wdt});
        detail::conv2d_into(squeezed, blob->array("expand1x1_weights"),
                            blob->array("expand1x1_bias"), f.expand1x1, /*fuse_relu=*/true, 0,
                            out, ctx);
        emit(node.name + "_expand1x1", "fire_expand", t0, before);

        before = ctx.counters;
        t0 = Clock::now();
        detail::conv2d_into(squeezed, blob->array("expand3x3_weights"),
                            blob->array("expand3x3_bias"), f.expand3x3, /*fuse_relu=*/true,
                            f.expand1x1.out_channels, out, ctx);
        emit(node.name + "_expand3x3", "fire_expand", t0, before);
      } else {
        const auto before = ctx.counters;
        const auto t0 = Clock::now();
        switch (node.kind) {
          case LayerKind::conv:
            out = conv2d(*ins[0], blob->array("weights"), blob->array("bias"),
                         std::get<ConvParams>(node.params), ctx);
            break;
          case LayerKind::pool:
            out = pool2d(*ins[0], std::get<PoolParams>(node.params), ctx);
            break;
          case LayerKind::global_avg_pool:
            out = global_avg_pool(*ins[0], ctx);
            break;
          case LayerKind::relu:
            out = relu(*ins[0], ctx);
            break;
          case LayerKind::lrn:
            out = lrn(*ins[0], std::get<LrnParams>(node.params), ctx);
            break;
          case LayerKind::batchnorm:
            out = batchnorm_inference(*ins[0], blob->array("mean"), blob->array("variance"),
                                      std::get<BatchNormParams>(node.params).eps, ctx);
            break;
          case LayerKind::scale:
            out = scale_shift(*ins[0], blob->array("gamma"), blob->array("beta"), ctx);
            break;
          case LayerKind::eltwise:
            out = eltwise_add(*ins[0], *ins[1], ctx);
            break;
          case LayerKind::concat: {
            out = concat_channels(*ins[0], *ins[1]);
            const auto n = static_cast<std::uint64_t>(out.count());
            ctx.counters[OpCategory::load] += n;
            ctx.counters[OpCategory::store] += n;
            break;
          }
          case LayerKind::fc:
            out = fully_connected(*ins[0], blob->array("weights"), blob->array("bias"), ctx);
            break;
          case LayerKind::softmax:
            out = softmax(*ins[0], ctx);
            break;
          case LayerKind::lstm:
          case LayerKind::gru:
            out = run_rnn_node(node, bindings[static_cast<std::size_t>(idx)].rnn, *ins[0], ctx);
            break;
          case LayerKind::fire:
            break;  // handled above
        }
        emit(node.name, record_type(node.kind), t0, before);
        release_inputs();
      }

      outs[static_cast<std::size_t>(idx)] = std::move(out);
    }
  }
  // Copied outside the scope so the returned tensor outlives the local
  // accountant without referencing it.
  result.output = *outs[static_cast<std::size_t>(order.back())];
  outs[static_cast<std::size_t>(order.back())].reset();
  result.peak_activation_bytes = accountant.peak_bytes();
  return result;
}

}  // namespace tango
