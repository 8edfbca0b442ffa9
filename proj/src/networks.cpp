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

// Builders for the seven benchmark topologies. Geometries follow the
// Caffe-lineage reference models the suite mirrors; the recorded launch
// figures are carried as descriptive metadata on matching layers.

#include <string>

#include "tango/graph.hpp"

namespace tango {

namespace {

LaunchMeta meta(int gx, int gy, int gz, int bx, int by, int bz, int regs, int smem, int cmem) {
  return LaunchMeta{{gx, gy, gz}, {bx, by, bz}, regs, smem, cmem};
}

LayerDescriptor conv_node(std::string name, int cin, int cout, int k, int stride, int pad,
                          int groups = 1) {
  return {std::move(name), LayerKind::conv,
          ConvParams{.in_channels = cin, .out_channels = cout, .kernel_h = k, .kernel_w = k,
                     .stride = stride, .pad = pad, .groups = groups},
          std::nullopt};
}

LayerDescriptor pool_node(std::string name, int window, int stride, PoolMode mode) {
  return {std::move(name), LayerKind::pool,
          PoolParams{.window = window, .stride = stride, .mode = mode}, std::nullopt};
}

LayerDescriptor relu_node(std::string name) {
  return {std::move(name), LayerKind::relu, std::monostate{}, std::nullopt};
}

LayerDescriptor fc_node(std::string name, int in_features, int out_features) {
  return {std::move(name), LayerKind::fc, FcParams{in_features, out_features}, std::nullopt};
}

NetworkGraph build_cifarnet() {
  NetworkGraph g;
  g.id = NetworkId::cifarnet;
  g.input_shape = Shape{3, 32, 32};
  g.output_len = 9;

  auto conv1 = conv_node("conv1", 3, 32, 5, 1, 2);
  conv1.launch_meta = meta(1, 1, 1, 32, 32, 1, 19, 40, 16);
  int n = g.add(std::move(conv1), {});

  auto pool1 = pool_node("pool1", 3, 2, PoolMode::max);
  pool1.launch_meta = meta(1, 1, 1, 32, 32, 1, 14, 60, 20);
  n = g.add(std::move(pool1), {n});
  n = g.add(relu_node("relu1"), {n});

  auto conv2 = conv_node("conv2", 32, 32, 5, 1, 2);
  conv2.launch_meta = meta(1, 1, 1, 32, 32, 1, 21, 56, 16);
  n = g.add(std::move(conv2), {n});
  n = g.add(relu_node("relu2"), {n});

  auto pool2 = pool_node("pool2", 3, 2, PoolMode::average);
  pool2.launch_meta = meta(1, 1, 1, 32, 32, 1, 8, 40, 4);
  n = g.add(std::move(pool2), {n});

  auto conv3 = conv_node("conv3", 32, 64, 5, 1, 2);
  conv3.launch_meta = meta(1, 1, 1, 32, 32, 1, 12, 40, 4);
  n = g.add(std::move(conv3), {n});
  n = g.add(relu_node("relu3"), {n});

  auto pool3 = pool_node("pool3", 3, 2, PoolMode::average);
  pool3.launch_meta = meta(1, 1, 1, 32, 32, 1, 14, 60, 20);
  n = g.add(std::move(pool3), {n});

  auto fc1 = fc_node("fc1", 64 * 4 * 4, 64);
  fc1.launch_meta = meta(1, 1, 1, 64, 1, 1, 19, 40, 16);
  n = g.add(std::move(fc1), {n});

  auto fc2 = fc_node("fc2", 64, 9);
  fc2.launch_meta = meta(1, 1, 1, 32, 1, 1, 10, 60, 12);
  n = g.add(std::move(fc2), {n});

  g.add({"softmax", LayerKind::softmax, std::monostate{}, std::nullopt}, {n});
  return g;
}

NetworkGraph build_alexnet() {
  NetworkGraph g;
  g.id = NetworkId::alexnet;
  g.input_shape = Shape{3, 227, 227};
  g.output_len = 1000;

  // conv1 runs as four sub-launches on the recorded hardware; the first
  // one's figures are kept.
  auto conv1 = conv_node("conv1", 3, 96, 11, 4, 0);
  conv1.launch_meta = meta(96, 1, 1, 32, 32, 1, 19, 56, 208);
  int n = g.add(std::move(conv1), {});
  n = g.add(relu_node("relu1"), {n});

  LayerDescriptor norm1{"norm1", LayerKind::lrn, LrnParams{}, meta(96, 1, 1, 32, 32, 1, 13, 64, 308)};
  n = g.add(std::move(norm1), {n});

  auto pool1 = pool_node("pool1", 3, 2, PoolMode::max);
  pool1.launch_meta = meta(96, 1, 1, 27, 27, 1, 12, 60, 204);
  n = g.add(std::move(pool1), {n});

  auto conv2 = conv_node("conv2", 96, 256, 5, 1, 2, /*groups=*/2);
  conv2.launch_meta = meta(128, 1, 1, 27, 27, 1, 18, 80, 204);
  n = g.add(std::move(conv2), {n});
  n = g.add(relu_node("relu2"), {n});

  LayerDescriptor norm2{"norm2", LayerKind::lrn, LrnParams{}, meta(256, 1, 1, 27, 27, 1, 13, 60, 308)};
  n = g.add(std::move(norm2), {n});

  auto pool2 = pool_node("pool2", 3, 2, PoolMode::max);
  pool2.launch_meta = meta(256, 1, 1, 13, 13, 1, 12, 60, 204);
  n = g.add(std::move(pool2), {n});

  auto conv3 = conv_node("conv3", 256, 384, 3, 1, 1);
  conv3.launch_meta = meta(384, 1, 1, 13, 13, 1, 18, 80, 204);
  n = g.add(std::move(conv3), {n});
  n = g.add(relu_node("relu3"), {n});

  auto conv4 = conv_node("conv4", 384, 384, 3, 1, 1, /*groups=*/2);
  conv4.launch_meta = meta(192, 1, 1, 13, 13, 1, 18, 80, 204);
  n = g.add(std::move(conv4), {n});
  n = g.add(relu_node("relu4"), {n});

  auto conv5 = conv_node("conv5", 384, 256, 3, 1, 1, /*groups=*/2);
  conv5.launch_meta = meta(128, 1, 1, 13, 13, 1, 18, 80, 204);
  n = g.add(std::move(conv5), {n});
  n = g.add(relu_node("relu5"), {n});

  auto pool5 = pool_node("pool5", 3, 2, PoolMode::max);
  pool5.launch_meta = meta(256, 1, 1, 6, 6, 1, 12, 60, 204);
  n = g.add(std::move(pool5), {n});

  auto fc6 = fc_node("fc6", 256 * 6 * 6, 4096);
  fc6.launch_meta = meta(4096, 1, 1, 1, 1, 1, 8, 58, 204);
  n = g.add(std::move(fc6), {n});
  n = g.add(relu_node("relu6"), {n});

  auto fc7 = fc_node("fc7", 4096, 4096);
  fc7.launch_meta = meta(4096, 1, 1, 1, 1, 1, 8, 58, 204);
  n = g.add(std::move(fc7), {n});
  n = g.add(relu_node("relu7"), {n});

  auto fc8 = fc_node("fc8", 4096, 1000);
  fc8.launch_meta = meta(1000, 1, 1, 1, 1, 1, 8, 58, 204);
  g.add(std::move(fc8), {n});
  return g;
}

NetworkGraph build_squeezenet() {
  NetworkGraph g;
  g.id = NetworkId::squeezenet;
  g.input_shape = Shape{3, 227, 227};
  g.output_len = 1000;

  auto conv1 = conv_node("conv1", 3, 96, 7, 2, 0);
  conv1.launch_meta = meta(111, 1, 1, 111, 1, 1, 19, 56, 12);
  int n = g.add(std::move(conv1), {});
  n = g.add(relu_node("relu_conv1"), {n});

  auto pool1 = pool_node("pool1", 3, 2, PoolMode::max);
  pool1.launch_meta = meta(111, 1, 1, 111, 1, 1, 21, 40, 20);
  n = g.add(std::move(pool1), {n});

  const auto fire = [&](std::string name, int cin, int s, int e, LaunchMeta m) {
    LayerDescriptor node{std::move(name), LayerKind::fire, make_fire_spec(cin, s, e, e), m};
    n = g.add(std::move(node), {n});
  };

  fire("fire2", 96, 16, 64, meta(55, 1, 1, 55, 1, 1, 15, 40, 4));
  fire("fire3", 128, 16, 64, meta(55, 1, 1, 55, 1, 1, 13, 40, 0));
  fire("fire4", 128, 32, 128, meta(55, 1, 1, 55, 1, 1, 13, 40, 0));

  auto pool4 = pool_node("pool4", 3, 2, PoolMode::max);
  pool4.launch_meta = meta(55, 1, 1, 55, 1, 1, 13, 40, 0);
  n = g.add(std::move(pool4), {n});

  fire("fire5", 256, 32, 128, meta(27, 1, 1, 27, 1, 1, 13, 40, 12));
  fire("fire6", 256, 48, 192, meta(27, 1, 1, 27, 1, 1, 13, 40, 0));
  fire("fire7", 384, 48, 192, meta(27, 1, 1, 27, 1, 1, 12, 60, 12));
  fire("fire8", 384, 64, 256, meta(27, 1, 1, 27, 1, 1, 13, 40, 0));

  auto pool8 = pool_node("pool8", 3, 2, PoolMode::max);
  pool8.launch_meta = meta(27, 1, 1, 27, 1, 1, 12, 60, 12);
  n = g.add(std::move(pool8), {n});

  fire("fire9", 512, 64, 256, meta(13, 1, 1, 13, 1, 1, 21, 40, 20));

  // The reference model pads this 1x1 classifier, so its maps are 15x15.
  auto conv10 = conv_node("conv10", 512, 1000, 1, 1, 1);
  conv10.launch_meta = meta(15, 1, 1, 15, 1, 1, 13, 40, 0);
  n = g.add(std::move(conv10), {n});
  n = g.add(relu_node("relu_conv10"), {n});

  LayerDescriptor gap{"global_avg_pool", LayerKind::global_avg_pool, std::monostate{},
                      meta(1, 1, 1, 1000, 1, 1, 14, 40, 0)};
  g.add(std::move(gap), {n});
  return g;
}

NetworkGraph build_resnet50() {
  NetworkGraph g;
  g.id = NetworkId::resnet50;
  g.input_shape = Shape{3, 224, 224};
  g.output_len = 1000;

  const auto bn = [](std::string name, int channels) {
    return LayerDescriptor{std::move(name), LayerKind::batchnorm, BatchNormParams{channels, 1e-5f},
                           std::nullopt};
  };
  const auto sc = [](std::string name, int channels) {
    return LayerDescriptor{std::move(name), LayerKind::scale, ScaleParams{channels}, std::nullopt};
  };

  auto conv1 = conv_node("conv1", 3, 64, 7, 2, 3);
  conv1.launch_meta = meta(64, 1, 1, 32, 32, 1, 29, 76, 12);
  int n = g.add(std::move(conv1), {});
  auto bn1 = bn("bn_conv1", 64);
  bn1.launch_meta = meta(64, 1, 1, 32, 32, 1, 12, 52, 12);
  n = g.add(std::move(bn1), {n});
  auto sc1 = sc("scale_conv1", 64);
  sc1.launch_meta = meta(64, 1, 1, 32, 32, 1, 12, 52, 4);
  n = g.add(std::move(sc1), {n});
  auto relu1 = relu_node("conv1_relu");
  relu1.launch_meta = meta(64, 1, 1, 32, 32, 1, 8, 32, 8);
  n = g.add(std::move(relu1), {n});
  auto pool1 = pool_node("pool1", 3, 2, PoolMode::max);
  pool1.launch_meta = meta(64, 1, 1, 32, 32, 1, 19, 68, 4);
  n = g.add(std::move(pool1), {n});

  // Bottleneck: branch2 = 1x1/3x3/1x1 conv+bn+scale chains, branch1 an
  // optional 1x1 projection; eltwise join then relu. Block 'a' of each
  // stage projects; stages 3-5 stride on branch2a and branch1.
  const auto block = [&](const std::string& tag, int cin, int mid, int cout, int stride,
                         bool project, bool with_meta) {
    const int shortcut_in = n;
    int branch1 = shortcut_in;
    if (project) {
      auto c = conv_node("res" + tag + "_branch1", cin, cout, 1, stride, 0);
      if (with_meta) c.launch_meta = meta(256, 1, 1, 32, 32, 1, 31, 84, 8);
      branch1 = g.add(std::move(c), {shortcut_in});
      auto b = bn("bn" + tag + "_branch1", cout);
      if (with_meta) b.launch_meta = meta(256, 1, 1, 32, 32, 1, 5, 48, 12);
      branch1 = g.add(std::move(b), {branch1});
      auto s = sc("scale" + tag + "_branch1", cout);
      if (with_meta) s.launch_meta = meta(256, 1, 1, 32, 32, 1, 12, 52, 4);
      branch1 = g.add(std::move(s), {branch1});
    }

    auto c2a = conv_node("res" + tag + "_branch2a", cin, mid, 1, stride, 0);
    if (with_meta) c2a.launch_meta = meta(64, 1, 1, 32, 32, 1, 31, 84, 8);
    int b2 = g.add(std::move(c2a), {shortcut_in});
    auto bn2a = bn("bn" + tag + "_branch2a", mid);
    if (with_meta) bn2a.launch_meta = meta(64, 1, 1, 32, 32, 1, 12, 52, 12);
    b2 = g.add(std::move(bn2a), {b2});
    auto sc2a = sc("scale" + tag + "_branch2a", mid);
    if (with_meta) sc2a.launch_meta = meta(64, 1, 1, 32, 32, 1, 12, 52, 4);
    b2 = g.add(std::move(sc2a), {b2});
    auto r2a = relu_node("res" + tag + "_branch2a_relu");
    if (with_meta) r2a.launch_meta = meta(64, 1, 1, 32, 32, 1, 8, 32, 8);
    b2 = g.add(std::move(r2a), {b2});

    auto c2b = conv_node("res" + tag + "_branch2b", mid, mid, 3, 1, 1);
    if (with_meta) c2b.launch_meta = meta(64, 1, 1, 32, 32, 1, 31, 84, 8);
    b2 = g.add(std::move(c2b), {b2});
    auto bn2b = bn("bn" + tag + "_branch2b", mid);
    if (with_meta) bn2b.launch_meta = meta(64, 1, 1, 32, 32, 1, 12, 52, 12);
    b2 = g.add(std::move(bn2b), {b2});
    auto sc2b = sc("scale" + tag + "_branch2b", mid);
    if (with_meta) sc2b.launch_meta = meta(64, 1, 1, 32, 32, 1, 12, 52, 4);
    b2 = g.add(std::move(sc2b), {b2});
    auto r2b = relu_node("res" + tag + "_branch2b_relu");
    if (with_meta) r2b.launch_meta = meta(64, 1, 1, 32, 32, 1, 8, 32, 8);
    b2 = g.add(std::move(r2b), {b2});

    auto c2c = conv_node("res" + tag + "_branch2c", mid, cout, 1, 1, 0);
    if (with_meta) c2c.launch_meta = meta(256, 1, 1, 32, 32, 1, 31, 84, 8);
    b2 = g.add(std::move(c2c), {b2});
    auto bn2c = bn("bn" + tag + "_branch2c", cout);
    if (with_meta) bn2c.launch_meta = meta(256, 1, 1, 32, 32, 1, 12, 52, 12);
    b2 = g.add(std::move(bn2c), {b2});
    auto sc2c = sc("scale" + tag + "_branch2c", cout);
    if (with_meta) sc2c.launch_meta = meta(256, 1, 1, 32, 32, 1, 12, 52, 4);
    b2 = g.add(std::move(sc2c), {b2});

    LayerDescriptor join{"res" + tag, LayerKind::eltwise, std::monostate{}, std::nullopt};
    if (with_meta) join.launch_meta = meta(256, 1, 1, 32, 32, 1, 11, 48, 4);
    int joined = g.add(std::move(join), {branch1, b2});
    auto relu_out = relu_node("res" + tag + "_relu");
    if (with_meta) relu_out.launch_meta = meta(256, 1, 1, 32, 32, 1, 8, 32, 8);
    n = g.add(std::move(relu_out), {joined});
  };

  const struct {
    int stage;
    int blocks;
    int mid;
    int cout;
  } stages[] = {{2, 3, 64, 256}, {3, 4, 128, 512}, {4, 6, 256, 1024}, {5, 3, 512, 2048}};

  int cin = 64;
  for (const auto& s : stages) {
    for (int b = 0; b < s.blocks; ++b) {
      const std::string tag = std::to_string(s.stage) + std::string(1, static_cast<char>('a' + b));
      const bool first = b == 0;
      const int stride = (first && s.stage > 2) ? 2 : 1;
      // Recorded figures cover conv1 through the start of res2b.
      const bool with_meta = s.stage == 2 && b == 0;
      block(tag, cin, s.mid, s.cout, stride, first, with_meta);
      cin = s.cout;
    }
  }

  // The recorded launch figures stop three rows into res2b.
  g.nodes[static_cast<std::size_t>(g.node_index("res2b_branch2a"))].launch_meta =
      meta(64, 1, 1, 32, 32, 1, 31, 84, 8);
  g.nodes[static_cast<std::size_t>(g.node_index("bn2b_branch2a"))].launch_meta =
      meta(64, 1, 1, 32, 32, 1, 12, 52, 12);
  g.nodes[static_cast<std::size_t>(g.node_index("scale2b_branch2a"))].launch_meta =
      meta(64, 1, 1, 32, 32, 1, 12, 52, 4);

  n = g.add({"pool5", LayerKind::global_avg_pool, std::monostate{}, std::nullopt}, {n});
  g.add(fc_node("fc1000", 2048, 1000), {n});
  return g;
}

NetworkGraph build_vgg16() {
  NetworkGraph g;
  g.id = NetworkId::vgg16;
  g.input_shape = Shape{3, 224, 224};
  g.output_len = 1000;

  int n = -1;
  const auto conv = [&](std::string name, int cin, int cout, LaunchMeta m) {
    auto node = conv_node(std::move(name), cin, cout, 3, 1, 1);
    node.launch_meta = m;
    n = n < 0 ? g.add(std::move(node), {}) : g.add(std::move(node), {n});
    n = g.add(relu_node("relu" + g.nodes[static_cast<std::size_t>(n)].name.substr(4)), {n});
  };
  const auto pool = [&](std::string name, std::optional<LaunchMeta> m) {
    auto node = pool_node(std::move(name), 2, 2, PoolMode::max);
    node.launch_meta = m;
    n = g.add(std::move(node), {n});
  };

  conv("conv1_1", 3, 64, meta(16, 16, 64, 14, 14, 1, 15, 0, 72));
  conv("conv1_2", 64, 64, meta(16, 16, 64, 14, 14, 1, 19, 0, 76));
  pool("pool1", meta(8, 8, 64, 14, 14, 1, 13, 0, 56));
  conv("conv2_1", 64, 128, meta(8, 8, 128, 14, 14, 1, 19, 0, 76));
  conv("conv2_2", 128, 128, meta(8, 8, 128, 14, 14, 1, 19, 0, 76));
  pool("pool2", meta(8, 8, 128, 7, 7, 1, 13, 0, 56));
  conv("conv3_1", 128, 256, meta(8, 8, 256, 7, 7, 1, 19, 0, 76));
  conv("conv3_2", 256, 256, meta(8, 8, 256, 7, 7, 1, 19, 0, 76));
  conv("conv3_3", 256, 256, meta(8, 8, 256, 7, 7, 1, 19, 0, 76));
  pool("pool3", meta(7, 7, 256, 4, 4, 1, 13, 0, 56));
  conv("conv4_1", 256, 512, meta(7, 7, 512, 4, 4, 1, 19, 0, 76));
  conv("conv4_2", 512, 512, meta(7, 7, 512, 4, 4, 1, 19, 0, 76));
  conv("conv4_3", 512, 512, meta(7, 7, 512, 4, 4, 1, 19, 0, 76));
  pool("pool4", meta(7, 7, 512, 2, 2, 1, 13, 0, 56));
  conv("conv5_1", 512, 512, meta(7, 7, 512, 2, 2, 1, 19, 0, 76));
  conv("conv5_2", 512, 512, meta(7, 7, 512, 2, 2, 1, 19, 0, 76));
  conv("conv5_3", 512, 512, meta(7, 7, 512, 2, 2, 1, 19, 0, 76));
  pool("pool5", std::nullopt);

  auto fc6 = fc_node("fc6", 512 * 7 * 7, 4096);
  fc6.launch_meta = meta(4, 4, 4, 8, 8, 1, 11, 0, 77);
  n = g.add(std::move(fc6), {n});
  n = g.add(relu_node("relu6"), {n});
  auto fc7 = fc_node("fc7", 4096, 4096);
  fc7.launch_meta = meta(1, 1, 10, 10, 10, 1, 11, 0, 77);
  n = g.add(std::move(fc7), {n});
  n = g.add(relu_node("relu7"), {n});
  n = g.add(fc_node("fc8", 4096, 1000), {n});
  g.add({"prob", LayerKind::softmax, std::monostate{}, std::nullopt}, {n});
  return g;
}

NetworkGraph build_rnn(NetworkId id) {
  NetworkGraph g;
  g.id = id;
  g.input_shape = Shape{2};  // two scaled prices
  g.output_len = 1;

  const bool is_lstm = id == NetworkId::lstm;
  LayerDescriptor cell{is_lstm ? "lstm1" : "gru1", is_lstm ? LayerKind::lstm : LayerKind::gru,
                       RnnParams{.kind = is_lstm ? RnnKind::lstm : RnnKind::gru,
                                 .input_dim = 1,
                                 .hidden_dim = 100,
                                 .steps = 2},
                       is_lstm ? meta(1, 1, 1, 100, 1, 1, 22, 936, 60)
                               : meta(1, 1, 1, 10, 10, 1, 12, 504, 56)};
  int n = g.add(std::move(cell), {});
  g.add(fc_node("fc_head", 100, 1), {n});
  return g;
}

}  // namespace

NetworkGraph build_network(NetworkId id) {
  NetworkGraph g;
  switch (id) {
    case NetworkId::cifarnet: g = build_cifarnet(); break;
    case NetworkId::alexnet: g = build_alexnet(); break;
    case NetworkId::squeezenet: g = build_squeezenet(); break;
    case NetworkId::resnet50: g = build_resnet50(); break;
    case NetworkId::vgg16: g = build_vgg16(); break;
    case NetworkId::lstm:
    case NetworkId::gru: g = build_rnn(id); break;
  }
  g.check_structure();
  return g;
}

}  // namespace tango
