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

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "oracles.hpp"
#include "tango/weights.hpp"

using namespace tango;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("tango_wtest_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

bool stores_bit_equal(const WeightStore& a, const WeightStore& b) {
  if (a.blobs.size() != b.blobs.size()) return false;
  for (std::size_t i = 0; i < a.blobs.size(); ++i) {
    const auto& x = a.blobs[i];
    const auto& y = b.blobs[i];
    if (x.layer != y.layer || x.arrays.size() != y.arrays.size()) return false;
    for (std::size_t j = 0; j < x.arrays.size(); ++j) {
      if (x.arrays[j].role != y.arrays[j].role || x.arrays[j].dims != y.arrays[j].dims) {
        return false;
      }
      if (!x.arrays[j].tensor.bit_equal(y.arrays[j].tensor)) return false;
    }
  }
  return true;
}

NetworkGraph single_fc_graph(const std::string& layer_name) {
  NetworkGraph g;
  g.id = NetworkId::cifarnet;
  g.input_shape = Shape{4};
  g.output_len = 3;
  g.add({layer_name, LayerKind::fc, FcParams{4, 3}, std::nullopt}, {});
  return g;
}

}  // namespace

TEST_CASE("count_parameters closed forms") {
  // fc 2 -> 3: 6 weights + 3 biases.
  NetworkGraph g;
  g.id = NetworkId::cifarnet;
  g.input_shape = Shape{2};
  g.output_len = 3;
  g.add({"fc", LayerKind::fc, FcParams{2, 3}, std::nullopt}, {});
  CHECK(count_parameters(g).total == 9);

  // Hand-summed totals for the reference geometries.
  const auto alex = count_parameters(build_network(NetworkId::alexnet));
  CHECK(alex.total == 60965224);
  const auto squeeze = count_parameters(build_network(NetworkId::squeezenet));
  CHECK(squeeze.total == 1248424);
  CHECK(count_parameters(build_network(NetworkId::lstm)).total == 40901);
  CHECK(count_parameters(build_network(NetworkId::gru)).total == 30701);

  const double ratio = static_cast<double>(alex.total) / static_cast<double>(squeeze.total);
  CHECK(ratio >= 40.0);
  CHECK(ratio <= 60.0);

  // The analytic count matches the summed blob sizes of a conforming store.
  const auto g2 = build_network(NetworkId::cifarnet);
  const auto store = generate_synthetic(g2, 1);
  CHECK(store.total_elements() == count_parameters(g2).total);
}

TEST_CASE("synthetic generation is deterministic and range-bounded") {
  const auto g = build_network(NetworkId::alexnet);
  const auto a = generate_synthetic(g, 42);
  const auto b = generate_synthetic(g, 42);
  CHECK(stores_bit_equal(a, b));

  const auto c = generate_synthetic(g, 43);
  CHECK(!stores_bit_equal(a, c));

  for (const auto& blob : a.blobs) {
    for (const auto& arr : blob.arrays) {
      for (std::int64_t i = 0; i < arr.tensor.count(); ++i) {
        const float v = arr.tensor[i];
        if (arr.role == "variance") {
          CHECK(v >= 0.5f);
          CHECK(v < 1.5f);
        } else {
          CHECK(v >= -0.05f);
          CHECK(v < 0.05f);
        }
      }
    }
  }
}

TEST_CASE("generation depends only on seed and array shapes") {
  const auto a = generate_synthetic(single_fc_graph("dense_a"), 11);
  const auto b = generate_synthetic(single_fc_graph("other_name"), 11);
  REQUIRE(a.blobs.size() == 1);
  REQUIRE(b.blobs.size() == 1);
  for (std::size_t j = 0; j < a.blobs[0].arrays.size(); ++j) {
    CHECK(a.blobs[0].arrays[j].tensor.bit_equal(b.blobs[0].arrays[j].tensor));
  }
}

TEST_CASE("write/load round-trip is bit-exact") {
  for (const auto id : {NetworkId::cifarnet, NetworkId::lstm}) {
    const auto g = build_network(id);
    const auto store = generate_synthetic(g, 9);
    const auto dir = scratch_dir(std::string("rt_") + to_string(id));
    const auto manifest = write_store(store, dir);
    CHECK(manifest.version == kManifestVersion);
    CHECK(manifest.layers.size() == store.blobs.size());

    const auto loaded = load_store(dir / kManifestFileName, g);
    CHECK(stores_bit_equal(store, loaded));
    CHECK(loaded.provenance == Provenance::imported);

    // Loaded weights drive inference end to end.
    ExecContext ctx;
    const Tensor input = id == NetworkId::lstm
                             ? Tensor::from_buffer(Shape{2}, std::vector<float>{0.2f, 0.4f})
                             : Tensor::constant(g.input_shape, 0.25f);
    const auto native = run_inference(g, store, input, ctx);
    const auto imported = run_inference(g, loaded, input, ctx);
    CHECK(native.output.bit_equal(imported.output));
    fs::remove_all(dir);
  }
}

TEST_CASE("fc blob file is 4 bytes per parameter") {
  NetworkGraph g;
  g.id = NetworkId::cifarnet;
  g.input_shape = Shape{2};
  g.output_len = 3;
  g.add({"dense", LayerKind::fc, FcParams{2, 3}, std::nullopt}, {});
  const auto dir = scratch_dir("fcsize");
  write_store(generate_synthetic(g, 3), dir);
  CHECK(fs::file_size(dir / "dense.bin") == 36);  // 4 * (6 + 3)
  fs::remove_all(dir);
}

TEST_CASE("two writes of the same seeded store are byte-identical") {
  const auto g = build_network(NetworkId::alexnet);
  const auto d1 = scratch_dir("alex1");
  const auto d2 = scratch_dir("alex2");
  write_store(generate_synthetic(g, 77), d1);
  write_store(generate_synthetic(g, 77), d2);
  CHECK(read_file(d1 / kManifestFileName) == read_file(d2 / kManifestFileName));
  CHECK(read_file(d1 / "conv1.bin") == read_file(d2 / "conv1.bin"));
  CHECK(read_file(d1 / "fc6.bin") == read_file(d2 / "fc6.bin"));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("load errors carry the failing layer") {
  const auto g = build_network(NetworkId::cifarnet);
  const auto store = generate_synthetic(g, 5);

  SUBCASE("manifest entry removed") {
    const auto dir = scratch_dir("missing_entry");
    write_store(store, dir);
    auto j = nlohmann::json::parse(read_file(dir / kManifestFileName));
    auto& layers = j["layers"];
    for (auto it = layers.begin(); it != layers.end(); ++it) {
      if ((*it)["name"] == "conv2") {
        layers.erase(it);
        break;
      }
    }
    std::ofstream(dir / kManifestFileName) << j.dump(2);
    CHECK_THROWS_WITH_AS(load_store(dir / kManifestFileName, g), doctest::Contains("conv2"),
                         PersistenceError);
    fs::remove_all(dir);
  }

  SUBCASE("weight file deleted") {
    const auto dir = scratch_dir("missing_file");
    write_store(store, dir);
    fs::remove(dir / "conv3.bin");
    CHECK_THROWS_WITH_AS(load_store(dir / kManifestFileName, g), doctest::Contains("conv3"),
                         PersistenceError);
    fs::remove_all(dir);
  }

  SUBCASE("weight file truncated by one byte") {
    const auto dir = scratch_dir("truncated");
    write_store(store, dir);
    const auto path = dir / "fc1.bin";
    fs::resize_file(path, fs::file_size(path) - 1);
    CHECK_THROWS_WITH_AS(load_store(dir / kManifestFileName, g), doctest::Contains("fc1"),
                         WeightError);
    fs::remove_all(dir);
  }

  SUBCASE("unknown manifest version") {
    const auto dir = scratch_dir("version");
    write_store(store, dir);
    auto j = nlohmann::json::parse(read_file(dir / kManifestFileName));
    j["version"] = 2;
    std::ofstream(dir / kManifestFileName) << j.dump(2);
    CHECK_THROWS_AS(load_store(dir / kManifestFileName, g), PersistenceError);
    fs::remove_all(dir);
  }

  SUBCASE("orphan blob") {
    const auto dir = scratch_dir("orphan");
    write_store(store, dir);
    auto j = nlohmann::json::parse(read_file(dir / kManifestFileName));
    auto extra = j["layers"][0];
    extra["name"] = "ghost";
    j["layers"].push_back(extra);
    std::ofstream(dir / kManifestFileName) << j.dump(2);
    CHECK_THROWS_WITH_AS(load_store(dir / kManifestFileName, g), doctest::Contains("ghost"),
                         WeightError);
    fs::remove_all(dir);
  }

  SUBCASE("manifest for a different network") {
    const auto dir = scratch_dir("wrongnet");
    write_store(store, dir);
    CHECK_THROWS_AS(load_store(dir / kManifestFileName, build_network(NetworkId::lstm)),
                    WeightError);
    fs::remove_all(dir);
  }
}
