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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <map>
#include <random>

#include "golden_shapes.hpp"
#include "oracles.hpp"
#include "tango/graph.hpp"
#include "tango/weights.hpp"

using namespace tango;

namespace {

std::map<LayerKind, int> kind_histogram(const NetworkGraph& g) {
  std::map<LayerKind, int> h;
  for (const auto& n : g.nodes) ++h[n.kind];
  return h;
}

NetworkGraph identity_bottleneck(int channels, int mid, int hw) {
  NetworkGraph g;
  g.id = NetworkId::resnet50;
  g.input_shape = Shape{channels, hw, hw};
  g.output_len = channels * hw * hw;

  int shortcut = g.add({"entry", LayerKind::relu, std::monostate{}, std::nullopt}, {});
  int b = g.add({"branch2a", LayerKind::conv,
                 ConvParams{.in_channels = channels, .out_channels = mid}, std::nullopt},
                {shortcut});
  b = g.add({"bn2a", LayerKind::batchnorm, BatchNormParams{mid, 1e-5f}, std::nullopt}, {b});
  b = g.add({"scale2a", LayerKind::scale, ScaleParams{mid}, std::nullopt}, {b});
  b = g.add({"relu2a", LayerKind::relu, std::monostate{}, std::nullopt}, {b});
  b = g.add({"branch2b", LayerKind::conv,
             ConvParams{.in_channels = mid, .out_channels = mid, .kernel_h = 3, .kernel_w = 3,
                        .stride = 1, .pad = 1},
             std::nullopt},
            {b});
  b = g.add({"bn2b", LayerKind::batchnorm, BatchNormParams{mid, 1e-5f}, std::nullopt}, {b});
  b = g.add({"scale2b", LayerKind::scale, ScaleParams{mid}, std::nullopt}, {b});
  b = g.add({"relu2b", LayerKind::relu, std::monostate{}, std::nullopt}, {b});
  b = g.add({"branch2c", LayerKind::conv,
             ConvParams{.in_channels = mid, .out_channels = channels}, std::nullopt},
            {b});
  b = g.add({"bn2c", LayerKind::batchnorm, BatchNormParams{channels, 1e-5f}, std::nullopt}, {b});
  b = g.add({"scale2c", LayerKind::scale, ScaleParams{channels}, std::nullopt}, {b});
  int join = g.add({"join", LayerKind::eltwise, std::monostate{}, std::nullopt}, {shortcut, b});
  g.add({"out_relu", LayerKind::relu, std::monostate{}, std::nullopt}, {join});
  g.check_structure();
  return g;
}

void force_identity_residual(WeightStore& store) {
  for (auto& blob : store.blobs) {
    for (auto& arr : blob.arrays) {
      float fill = 0.0f;
      if (arr.role == "variance" || arr.role == "gamma") fill = 1.0f;
      if (arr.role == "mean" || arr.role == "beta" || arr.role == "weights" || arr.role == "bias") {
        fill = 0.0f;
      }
      arr.tensor = Tensor::constant(arr.tensor.shape(), fill);
    }
  }
}

}  // namespace

TEST_CASE("cifarnet topology") {
  const auto g = build_network(NetworkId::cifarnet);
  const auto h = kind_histogram(g);
  CHECK(h.at(LayerKind::conv) == 3);
  CHECK(h.at(LayerKind::fc) == 2);
  CHECK(h.at(LayerKind::pool) == 3);
  CHECK(g.nodes.back().kind == LayerKind::softmax);
  CHECK(g.output_len == 9);
  CHECK(g.input_shape == Shape{3, 32, 32});
}

TEST_CASE("alexnet topology") {
  const auto g = build_network(NetworkId::alexnet);
  const auto h = kind_histogram(g);
  CHECK(h.at(LayerKind::conv) == 5);
  CHECK(h.at(LayerKind::fc) == 3);
  CHECK(h.at(LayerKind::lrn) == 2);
  CHECK(h.at(LayerKind::pool) == 3);
  CHECK(g.input_shape == Shape{3, 227, 227});
  CHECK(g.output_len == 1000);
  // Grouped convolutions on conv2/conv4/conv5.
  CHECK(std::get<ConvParams>(g.nodes[static_cast<std::size_t>(g.node_index("conv2"))].params).groups == 2);
  CHECK(std::get<ConvParams>(g.nodes[static_cast<std::size_t>(g.node_index("conv4"))].params).groups == 2);
  CHECK(std::get<ConvParams>(g.nodes[static_cast<std::size_t>(g.node_index("conv5"))].params).groups == 2);
  CHECK(std::get<ConvParams>(g.nodes[static_cast<std::size_t>(g.node_index("conv3"))].params).groups == 1);
}

TEST_CASE("squeezenet topology") {
  const auto g = build_network(NetworkId::squeezenet);
  const auto h = kind_histogram(g);
  CHECK(h.at(LayerKind::conv) == 2);
  CHECK(h.at(LayerKind::fire) == 8);
  CHECK(h.at(LayerKind::global_avg_pool) == 1);
  CHECK(g.output_len == 1000);
  const auto& fire2 = std::get<FireSpec>(g.nodes[static_cast<std::size_t>(g.node_index("fire2"))].params);
  CHECK(fire2.squeeze.out_channels == 16);
  CHECK(fire2.expand1x1.out_channels == 64);
  CHECK(fire2.expand3x3.out_channels == 64);
}

TEST_CASE("resnet50 topology") {
  const auto g = build_network(NetworkId::resnet50);
  const auto h = kind_histogram(g);
  CHECK(h.at(LayerKind::conv) == 53);  // 49 main-path + 4 projection shortcuts
  CHECK(h.at(LayerKind::fc) == 1);
  CHECK(h.at(LayerKind::eltwise) == 16);
  CHECK(h.at(LayerKind::batchnorm) == 53);
  CHECK(h.at(LayerKind::scale) == 53);
  CHECK(h.at(LayerKind::global_avg_pool) == 1);
  CHECK(g.output_len == 1000);

  // Branch tails precede their eltwise join.
  const auto order = topological_schedule(g);
  std::map<std::string, int> pos;
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
  CHECK(pos.at("scale2a_branch1") < pos.at("res2a"));
  CHECK(pos.at("scale2a_branch2c") < pos.at("res2a"));
  CHECK(pos.at("res2a") < pos.at("res2a_relu"));

  const auto& join = g.nodes[static_cast<std::size_t>(g.node_index("res2a"))];
  REQUIRE(join.launch_meta.has_value());
  CHECK(join.launch_meta->grid == std::array<int, 3>{256, 1, 1});
  CHECK(join.launch_meta->block == std::array<int, 3>{32, 32, 1});
}

TEST_CASE("vgg16 topology") {
  const auto g = build_network(NetworkId::vgg16);
  const auto h = kind_histogram(g);
  CHECK(h.at(LayerKind::conv) == 13);
  CHECK(h.at(LayerKind::fc) == 3);
  CHECK(h.at(LayerKind::pool) == 5);
  CHECK(h.at(LayerKind::softmax) == 1);
  CHECK(g.output_len == 1000);
}

TEST_CASE("rnn topologies") {
  for (const auto id : {NetworkId::lstm, NetworkId::gru}) {
    const auto g = build_network(id);
    CHECK(g.nodes.size() == 2);
    const auto& p = std::get<RnnParams>(g.nodes[0].params);
    CHECK(p.hidden_dim == 100);
    CHECK(p.steps == 2);
    CHECK(p.input_dim == 1);
    CHECK(g.input_shape == Shape{2});
    CHECK(g.output_len == 1);
  }
}

TEST_CASE("schedule of a linear chain is declaration order") {
  NetworkGraph g;
  g.id = NetworkId::cifarnet;
  g.input_shape = Shape{4};
  g.output_len = 4;
  int a = g.add({"a", LayerKind::relu, std::monostate{}, std::nullopt}, {});
  int b = g.add({"b", LayerKind::relu, std::monostate{}, std::nullopt}, {a});
  g.add({"c", LayerKind::softmax, std::monostate{}, std::nullopt}, {b});
  CHECK(topological_schedule(g) == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("schedule satisfies every edge on random joins") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    NetworkGraph g;
    g.id = NetworkId::cifarnet;
    g.input_shape = Shape{4};
    g.output_len = 4;
    std::uniform_int_distribution<int> d_n(3, 8);
    const int n = d_n(rng);
    std::vector<int> ids;
    ids.push_back(g.add({"n0", LayerKind::relu, std::monostate{}, std::nullopt}, {}));
    for (int i = 1; i < n; ++i) {
      std::uniform_int_distribution<int> d_pred(0, i - 1);
      const bool join = i >= 2 && (rng() % 3 == 0);
      const std::string name = "n" + std::to_string(i);
      if (join) {
        int p1 = d_pred(rng), p2 = d_pred(rng);
        while (p2 == p1) p2 = d_pred(rng);
        if (i >= 2 && p1 != p2) {
          ids.push_back(g.add({name, LayerKind::eltwise, std::monostate{}, std::nullopt},
                              {ids[static_cast<std::size_t>(p1)], ids[static_cast<std::size_t>(p2)]}));
          continue;
        }
      }
      ids.push_back(g.add({name, LayerKind::relu, std::monostate{}, std::nullopt},
                          {ids[static_cast<std::size_t>(d_pred(rng))]}));
    }
    const auto order = schedule_indexes(g);
    std::vector<int> pos(g.nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) pos[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    for (const auto& [from, to] : g.edges) {
      CHECK(pos[static_cast<std::size_t>(from)] < pos[static_cast<std::size_t>(to)]);
    }
    CHECK(schedule_indexes(g) == order);  // deterministic
  }
}

TEST_CASE("cycle detection") {
  NetworkGraph g;
  g.id = NetworkId::cifarnet;
  g.input_shape = Shape{4};
  g.output_len = 4;
  int a = g.add({"a", LayerKind::relu, std::monostate{}, std::nullopt}, {});
  int b = g.add({"b", LayerKind::relu, std::monostate{}, std::nullopt}, {a});
  g.edges.emplace_back(b, a);  // back edge
  CHECK_THROWS_AS(schedule_indexes(g), GraphError);
}

TEST_CASE("validate_shapes endpoints") {
  CHECK(validate_shapes(build_network(NetworkId::alexnet), Shape{3, 227, 227}).back().output ==
        Shape{1000});
  CHECK(validate_shapes(build_network(NetworkId::resnet50), Shape{3, 224, 224}).back().output ==
        Shape{1000});
  // Wrong spatial extent surfaces at the first inconsistent layer (fc6);
  // a wrong channel count is caught immediately at conv1.
  CHECK_THROWS_WITH_AS(validate_shapes(build_network(NetworkId::alexnet), Shape{3, 180, 180}),
                       doctest::Contains("fc6"), ShapeError);
  CHECK_THROWS_WITH_AS(validate_shapes(build_network(NetworkId::cifarnet), Shape{1, 32, 32}),
                       doctest::Contains("conv1"), ShapeError);
}

TEST_CASE("validate_shapes matches the golden tables") {
  for (const auto& golden : golden_shapes()) {
    const auto g = build_network(network_from_name(golden.network));
    const auto trace = validate_shapes(g, g.input_shape);
    REQUIRE(trace.size() == golden.entries.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
      CHECK(trace[i].layer == golden.entries[i].first);
      CHECK(trace[i].output.to_string() == golden.entries[i].second);
    }
  }
}

TEST_CASE("run_inference is deterministic and normalizes cifarnet") {
  const auto g = build_network(NetworkId::cifarnet);
  const auto store = generate_synthetic(g, 7);
  std::mt19937 rng(32);
  const Tensor input = oracle::random_tensor(g.input_shape, rng, 0.0f, 1.0f);

  ExecContext c1, c2, c4(4);
  const auto r1 = run_inference(g, store, input, c1);
  const auto r2 = run_inference(g, store, input, c2);
  const auto r4 = run_inference(g, store, input, c4);
  CHECK(r1.output.bit_equal(r2.output));
  CHECK(r1.output.bit_equal(r4.output));
  CHECK(c1.counters == c2.counters);
  CHECK(c1.counters == c4.counters);

  REQUIRE(r1.output.count() == 9);
  double sum = 0.0;
  for (int i = 0; i < 9; ++i) {
    CHECK(r1.output[i] > 0.0f);
    CHECK(r1.output[i] <= 1.0f);
    sum += r1.output[i];
  }
  CHECK(std::abs(sum - 1.0) <= 1e-6);
}

TEST_CASE("run_inference equals the hand-assembled layer pipeline") {
  const auto g = build_network(NetworkId::cifarnet);
  const auto store = generate_synthetic(g, 1234);
  std::mt19937 rng(33);
  const Tensor input = oracle::random_tensor(g.input_shape, rng, 0.0f, 1.0f);

  ExecContext ctx;
  const auto result = run_inference(g, store, input, ctx);

  ExecContext manual;
  const auto conv_p = [&](const char* name) {
    return std::get<ConvParams>(g.nodes[static_cast<std::size_t>(g.node_index(name))].params);
  };
  Tensor t = conv2d(input, store.blob("conv1").array("weights"), store.blob("conv1").array("bias"),
                    conv_p("conv1"), manual);
  t = pool2d(t, PoolParams{3, 2, PoolMode::max}, manual);
  t = relu(t, manual);
  t = conv2d(t, store.blob("conv2").array("weights"), store.blob("conv2").array("bias"),
             conv_p("conv2"), manual);
  t = relu(t, manual);
  t = pool2d(t, PoolParams{3, 2, PoolMode::average}, manual);
  t = conv2d(t, store.blob("conv3").array("weights"), store.blob("conv3").array("bias"),
             conv_p("conv3"), manual);
  t = relu(t, manual);
  t = pool2d(t, PoolParams{3, 2, PoolMode::average}, manual);
  t = fully_connected(t, store.blob("fc1").array("weights"), store.blob("fc1").array("bias"),
                      manual);
  t = fully_connected(t, store.blob("fc2").array("weights"), store.blob("fc2").array("bias"),
                      manual);
  t = softmax(t, manual);

  CHECK(result.output.bit_equal(t));
  CHECK(ctx.counters == manual.counters);
}

TEST_CASE("rnn graphs match rnn_forecast composition") {
  for (const auto id : {NetworkId::lstm, NetworkId::gru}) {
    const auto g = build_network(id);
    const auto store = generate_synthetic(g, 99);
    const Tensor prices = Tensor::from_buffer(Shape{2}, std::vector<float>{0.63f, 0.71f});

    ExecContext ctx;
    const auto result = run_inference(g, store, prices, ctx);
    REQUIRE(result.output.count() == 1);

    const auto& cell_blob = store.blobs.front();
    RnnCellWeights w;
    w.kind = id == NetworkId::lstm ? RnnKind::lstm : RnnKind::gru;
    w.input_dim = 1;
    w.hidden_dim = 100;
    const auto gates = id == NetworkId::lstm ? std::vector<std::string>{"i", "f", "o", "g"}
                                             : std::vector<std::string>{"z", "r", "h"};
    for (const auto& gate : gates) {
      w.gates.push_back({cell_blob.array("w_" + gate), cell_blob.array("u_" + gate),
                         cell_blob.array("b_" + gate)});
    }
    ExecContext manual;
    const Tensor expect = rnn_forecast({Tensor::constant(Shape{1}, 0.63f),
                                        Tensor::constant(Shape{1}, 0.71f)},
                                       w, store.blob("fc_head").array("weights"),
                                       store.blob("fc_head").array("bias"), manual);
    CHECK(result.output.bit_equal(expect));
  }
}

TEST_CASE("zeroed residual branch collapses a bottleneck to its shortcut") {
  const auto g = identity_bottleneck(8, 4, 6);
  auto store = generate_synthetic(g, 5);
  force_identity_residual(store);

  std::mt19937 rng(34);
  const Tensor input = oracle::random_tensor(g.input_shape, rng, 0.0f, 1.0f);  // non-negative
  ExecContext ctx;
  const auto result = run_inference(g, store, input, ctx);
  REQUIRE(result.output.count() == input.count());
  for (std::int64_t i = 0; i < input.count(); ++i) {
    CHECK(oracle::close(result.output[i], input[i], 1e-5));
  }
}

TEST_CASE("run_inference names missing weight blobs") {
  const auto g = build_network(NetworkId::cifarnet);
  auto store = generate_synthetic(g, 7);
  store.blobs.erase(store.blobs.begin() + 1);  // drop conv2
  ExecContext ctx;
  const Tensor input = Tensor::zeros(g.input_shape);
  CHECK_THROWS_WITH_AS(run_inference(g, store, input, ctx),
                       doctest::Contains("conv2"), WeightError);
}

TEST_CASE("run_inference names ill-sized weight blobs") {
  const auto g = build_network(NetworkId::cifarnet);
  auto store = generate_synthetic(g, 7);
  for (auto& blob : store.blobs) {
    if (blob.layer == "conv3") blob.arrays[1].tensor = Tensor::zeros(Shape{63});  // bias short
  }
  ExecContext ctx;
  const Tensor input = Tensor::zeros(g.input_shape);
  CHECK_THROWS_WITH_AS(run_inference(g, store, input, ctx),
                       doctest::Contains("conv3"), WeightError);
}

TEST_CASE("branchy graphs account activations exactly like the walker") {
  const auto g = identity_bottleneck(6, 3, 8);
  const auto store = generate_synthetic(g, 23);
  std::mt19937 rng(36);
  const Tensor input = oracle::random_tensor(g.input_shape, rng, 0.0f, 1.0f);
  ExecContext ctx(2);
  const auto result = run_inference(g, store, input, ctx);
  CHECK(result.peak_activation_bytes == footprint(g).peak_activation_bytes);
}

TEST_CASE("argmax_class") {
  CHECK(argmax_class(Tensor::from_buffer(Shape{3}, std::vector<float>{0.1f, 0.7f, 0.2f})) == 1);
  CHECK(argmax_class(Tensor::from_buffer(Shape{2}, std::vector<float>{0.5f, 0.5f})) == 0);
  std::mt19937 rng(35);
  for (int i = 0; i < 50; ++i) {
    const Tensor v = oracle::random_tensor(Shape{1 + static_cast<int>(rng() % 20)}, rng);
    int best = 0;
    for (std::int64_t j = 1; j < v.count(); ++j) {
      if (v[j] > v[best]) best = static_cast<int>(j);
    }
    CHECK(argmax_class(v) == best);
  }
}

TEST_CASE("network_to_json round-trips structurally") {
  const auto g = build_network(NetworkId::squeezenet);
  const auto j = nlohmann::json::parse(network_to_json(g));
  CHECK(j["network"] == "squeezenet");
  CHECK(j["nodes"].size() == g.nodes.size());
  CHECK(j["edges"].size() == g.edges.size());
  bool found_conv10 = false;
  for (const auto& n : j["nodes"]) {
    if (n["name"] == "conv10") {
      found_conv10 = true;
      CHECK(n["launch_meta"]["grid"][0] == 15);
      CHECK(n["params"]["pad"] == 1);
    }
  }
  CHECK(found_conv10);
}
