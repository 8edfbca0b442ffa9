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

// Command-line surface: list | run | bench | gen-weights | validate.
// Every command is deterministic given its flags (seed included); exit
// codes partition the error classes:
//   0 success, 2 config error, 3 weight/persistence error, 4 input error,
//   5 internal shape inconsistency (validate).

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tango/graph.hpp"
#include "tango/profile.hpp"
#include "tango/weights.hpp"

namespace fs = std::filesystem;
using namespace tango;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitWeights = 3;
constexpr int kExitInput = 4;
constexpr int kExitInternal = 5;

std::string fmt_float(float v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

enum class InputKind { none, raw_f32, ppm_image, price_pair, synthetic };

struct RunConfig {
  std::string network;
  std::optional<std::uint64_t> seed;  // synthetic weights
  std::string weights_dir;            // or an on-disk store
  InputKind input_kind = InputKind::none;
  std::string input_path;
  std::vector<float> prices;
  std::uint64_t input_seed = 0;
  std::vector<float> mean_subtract;  // optional per-channel means
  std::string out_dir;
  std::vector<std::string> formats{"csv"};
  int repeats = 5;
  int workers = 1;
  bool counters_only = false;
};

std::string default_out_dir() {
  if (const char* env = std::getenv("TANGO_OUT_DIR"); env && *env) return env;
  return ".";
}

std::vector<float> parse_float_list(const std::string& text) {
  std::vector<float> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stof(item));
    } catch (const std::exception&) {
      throw InputError("cannot parse '" + item + "' as a real number");
    }
  }
  return out;
}

void apply_json_config(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("malformed config " + path + ": " + e.what());
  }
  if (j.contains("network")) cfg.network = j["network"].get<std::string>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("weights")) cfg.weights_dir = j["weights"].get<std::string>();
  if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
  if (j.contains("formats")) cfg.formats = j["formats"].get<std::vector<std::string>>();
  if (j.contains("repeats")) cfg.repeats = j["repeats"].get<int>();
  if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
  if (j.contains("counters_only")) cfg.counters_only = j["counters_only"].get<bool>();
  if (j.contains("mean_subtract")) cfg.mean_subtract = j["mean_subtract"].get<std::vector<float>>();
  if (j.contains("input")) {
    const auto& ij = j["input"];
    const auto kind = ij.value("kind", "");
    if (kind == "raw_f32") {
      cfg.input_kind = InputKind::raw_f32;
      cfg.input_path = ij.at("path").get<std::string>();
    } else if (kind == "ppm_image") {
      cfg.input_kind = InputKind::ppm_image;
      cfg.input_path = ij.at("path").get<std::string>();
    } else if (kind == "price_pair") {
      cfg.input_kind = InputKind::price_pair;
      cfg.prices = ij.at("values").get<std::vector<float>>();
    } else if (kind == "synthetic") {
      cfg.input_kind = InputKind::synthetic;
      cfg.input_seed = ij.value("seed", std::uint64_t{0});
    } else {
      throw UsageError("config input.kind must be raw_f32|ppm_image|price_pair|synthetic");
    }
  }
}

void check_config(const RunConfig& cfg, bool needs_input) {
  if (cfg.network.empty()) throw UsageError("--network is required");
  const bool has_seed = cfg.seed.has_value();
  const bool has_dir = !cfg.weights_dir.empty();
  if (has_seed == has_dir) {
    throw UsageError("exactly one of --seed and --weights must be given");
  }
  if (cfg.repeats < 1) throw UsageError("--repeats must be >= 1");
  if (cfg.workers < 1) throw UsageError("--workers must be >= 1");
  if (needs_input && cfg.input_kind == InputKind::none) {
    throw UsageError("an input is required: --input, --prices or --gen-input");
  }
}

WeightStore obtain_store(const RunConfig& cfg, const NetworkGraph& g) {
  if (cfg.seed) return generate_synthetic(g, *cfg.seed);
  return load_store(fs::path(cfg.weights_dir) / kManifestFileName, g);
}

Tensor load_raw_f32(const std::string& path, const Shape& shape) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file " + path);
  std::vector<float> values(static_cast<std::size_t>(shape.count()));
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(values.size() * sizeof(float))) {
    throw InputError("input file " + path + " is shorter than " + shape.to_string());
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw InputError("input file " + path + " is longer than " + shape.to_string());
  }
  return Tensor::from_buffer(shape, values);
}

// 8-bit binary PPM (P6); pixels scaled to [0,1] and stored channel-major.
Tensor load_ppm(const std::string& path, const Shape& shape) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open image " + path);
  std::string magic;
  in >> magic;
  if (magic != "P6") throw InputError(path + " is not a binary PPM (P6) image");
  const auto next_int = [&in, &path]() {
    for (;;) {
      const int c = in.peek();
      if (c == '#') {
        std::string comment;
        std::getline(in, comment);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    int v = 0;
    if (!(in >> v) || v <= 0) throw InputError("malformed PPM header in " + path);
    return v;
  };
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (maxval != 255) throw InputError(path + ": only 8-bit PPM images are supported");
  in.get();  // single whitespace before the raster
  if (shape.rank() != 3 || shape.channels() != 3) {
    throw InputError("this network does not take a 3-channel image input");
  }
  if (h != shape.height() || w != shape.width()) {
    throw InputError(path + " is " + std::to_string(w) + "x" + std::to_string(h) +
                     ", network expects " + std::to_string(shape.width()) + "x" +
                     std::to_string(shape.height()));
  }
  std::vector<unsigned char> raster(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (in.gcount() != static_cast<std::streamsize>(raster.size())) {
    throw InputError(path + " raster is truncated");
  }
  std::vector<float> values(raster.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        values[static_cast<std::size_t>((c * h + y) * w + x)] =
            static_cast<float>(raster[static_cast<std::size_t>((y * w + x) * 3 + c)]) / 255.0f;
      }
    }
  }
  return Tensor::from_buffer(shape, values);
}

Tensor build_input(const RunConfig& cfg, const NetworkGraph& g) {
  const Shape& shape = g.input_shape;
  Tensor input;
  switch (cfg.input_kind) {
    case InputKind::raw_f32:
      input = load_raw_f32(cfg.input_path, shape);
      break;
    case InputKind::ppm_image:
      input = load_ppm(cfg.input_path, shape);
      break;
    case InputKind::price_pair: {
      if (cfg.prices.size() != 2) {
        throw InputError("--prices takes exactly two values, got " +
                         std::to_string(cfg.prices.size()));
      }
      if (shape.count() != 2) {
        throw InputError("network " + cfg.network + " does not take a price pair");
      }
      input = Tensor::from_buffer(shape, cfg.prices);
      break;
    }
    case InputKind::synthetic: {
      SplitMix64 rng(cfg.input_seed);
      std::vector<float> values(static_cast<std::size_t>(shape.count()));
      for (auto& v : values) v = rng.uniform(0.0f, 1.0f);
      input = Tensor::from_buffer(shape, values);
      break;
    }
    case InputKind::none:
      throw UsageError("no input configured");
  }
  if (!cfg.mean_subtract.empty()) {
    if (shape.rank() != 3 ||
        cfg.mean_subtract.size() != static_cast<std::size_t>(shape.channels())) {
      throw InputError("--mean-sub needs one value per input channel");
    }
    const std::int64_t hw = static_cast<std::int64_t>(shape.height()) * shape.width();
    std::vector<float> values(input.data(), input.data() + input.count());
    for (int c = 0; c < shape.channels(); ++c) {
      for (std::int64_t i = 0; i < hw; ++i) {
        values[static_cast<std::size_t>(c * hw + i)] -=
            cfg.mean_subtract[static_cast<std::size_t>(c)];
      }
    }
    input = Tensor::from_buffer(shape, values);
  }
  return input;
}

bool is_rnn(NetworkId id) { return id == NetworkId::lstm || id == NetworkId::gru; }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PersistenceError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw PersistenceError("write failed for " + path.string());
}

int cmd_list() {
  std::printf("%-11s %7s %12s %8s %12s\n", "network", "layers", "input", "outputs", "params");
  for (const auto id : all_networks()) {
    const auto g = build_network(id);
    std::printf("%-11s %7zu %12s %8d %12lld\n", to_string(id), g.nodes.size(),
                g.input_shape.to_string().c_str(), g.output_len,
                static_cast<long long>(count_parameters(g).total));
  }
  return kExitOk;
}

int cmd_run(const RunConfig& cfg) {
  check_config(cfg, /*needs_input=*/true);
  const auto g = build_network(network_from_name(cfg.network));
  const auto store = obtain_store(cfg, g);
  const Tensor input = build_input(cfg, g);
  ExecContext ctx(cfg.workers);
  const auto result = run_inference(g, store, input, ctx);

  nlohmann::ordered_json out_doc;
  out_doc["network"] = to_string(g.id);
  if (is_rnn(g.id)) {
    std::printf("forecast %s\n", fmt_float(result.output[0]).c_str());
    out_doc["forecast"] = result.output[0];
  } else {
    std::printf("class %d\n", argmax_class(result.output));
    out_doc["class"] = argmax_class(result.output);
  }
  if (!cfg.out_dir.empty()) {
    auto values = nlohmann::ordered_json::array();
    for (std::int64_t i = 0; i < result.output.count(); ++i) values.push_back(result.output[i]);
    out_doc["output"] = std::move(values);
    const auto path = fs::path(cfg.out_dir) / (std::string(to_string(g.id)) + "_output.json");
    write_text(path, out_doc.dump(2) + "\n");
    std::printf("wrote %s\n", path.string().c_str());
  }
  return kExitOk;
}

int cmd_bench(const RunConfig& cfg) {
  check_config(cfg, /*needs_input=*/true);
  const auto g = build_network(network_from_name(cfg.network));
  const auto store = obtain_store(cfg, g);
  const Tensor input = build_input(cfg, g);
  ExecContext ctx(cfg.workers);

  auto records = profile_run(g, store, input, cfg.repeats, ctx);
  if (cfg.counters_only) records = strip_timing(std::move(records));

  auto report = breakdown_by_layer_type(records);
  report.network = to_string(g.id);
  report.meta.workers = cfg.workers;
  report.meta.seed = cfg.seed.value_or(0);
  if (!cfg.counters_only) {
    report.meta.timestamp =
        static_cast<std::int64_t>(std::chrono::duration_cast<std::chrono::seconds>(
                                      std::chrono::system_clock::now().time_since_epoch())
                                      .count());
  }
  const auto fp = footprint(g);

  std::printf("%-14s %12s %12s\n", "layer_type", "time_share", "op_share");
  for (const auto& row : report.rows) {
    std::printf("%-14s %12.6f %12.6f\n", row.layer_type.c_str(), row.time_share, row.op_share);
  }
  std::printf("footprint: weights %llu B, peak activations %llu B, total %llu B\n",
              static_cast<unsigned long long>(fp.weight_bytes),
              static_cast<unsigned long long>(fp.peak_activation_bytes),
              static_cast<unsigned long long>(fp.total_bytes));

  const fs::path out_dir = cfg.out_dir.empty() ? default_out_dir() : cfg.out_dir;
  for (const auto& name : cfg.formats) {
    const auto format = report_format_from_name(name);
    const auto breakdown_path = out_dir / (std::string(to_string(g.id)) + "_breakdown." + name);
    write_text(breakdown_path, emit_report(report, format));
    std::printf("wrote %s\n", breakdown_path.string().c_str());
    const auto fp_path = out_dir / (std::string(to_string(g.id)) + "_footprint." + name);
    write_text(fp_path, emit_report(fp, format));
    std::printf("wrote %s\n", fp_path.string().c_str());
  }
  return kExitOk;
}

int cmd_gen_weights(const RunConfig& cfg) {
  if (cfg.network.empty()) throw UsageError("--network is required");
  if (!cfg.seed) throw UsageError("gen-weights needs --seed");
  const auto g = build_network(network_from_name(cfg.network));
  const fs::path dir = cfg.out_dir.empty() ? fs::path(default_out_dir()) / to_string(g.id)
                                           : fs::path(cfg.out_dir);
  write_store(generate_synthetic(g, *cfg.seed), dir);
  std::printf("wrote %s\n", (dir / kManifestFileName).string().c_str());
  return kExitOk;
}

int cmd_validate(const RunConfig& cfg, const std::string& export_path) {
  if (cfg.network.empty()) throw UsageError("--network is required");
  const auto g = build_network(network_from_name(cfg.network));
  if (!export_path.empty()) {
    write_text(export_path, network_to_json(g) + "\n");
    std::printf("wrote %s\n", export_path.c_str());
  }
  try {
    const auto trace = validate_shapes(g, g.input_shape);
    for (const auto& e : trace) {
      std::string ins;
      for (std::size_t i = 0; i < e.inputs.size(); ++i) {
        if (i) ins += "+";
        ins += e.inputs[i].to_string();
      }
      std::printf("%s: %s -> %s\n", e.layer.c_str(), ins.c_str(), e.output.to_string().c_str());
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: shape validation failed: %s\n", e.what());
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DNN inference benchmark suite and characterization harness"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string prices_text;
  std::string mean_text;
  std::string json_config;
  std::optional<std::uint64_t> gen_input_seed;

  const auto add_common = [&](CLI::App* cmd, bool with_input) {
    cmd->add_option("--network", cfg.network,
                    "cifarnet|alexnet|squeezenet|resnet50|vgg16|lstm|gru");
    cmd->add_option("--seed", cfg.seed, "generate synthetic weights from this seed");
    cmd->add_option("--weights", cfg.weights_dir, "directory holding manifest.json + blobs");
    cmd->add_option("--out", cfg.out_dir, "output directory (default $TANGO_OUT_DIR or .)");
    cmd->add_option("--workers", cfg.workers, "worker threads (results are worker-invariant)");
    cmd->add_option("--json-config", json_config, "read a RunConfig JSON document");
    if (with_input) {
      cmd->add_option("--input", cfg.input_path, "raw float32 file or PPM (P6) image");
      cmd->add_option("--prices", prices_text, "two comma-separated scaled prices (RNNs)");
      cmd->add_option("--gen-input", gen_input_seed, "seeded synthetic input");
      cmd->add_option("--mean-sub", mean_text, "per-channel means subtracted after scaling");
    }
  };

  auto* list = app.add_subcommand("list", "show the seven networks");
  auto* run = app.add_subcommand("run", "single inference, printing class id or forecast");
  add_common(run, true);
  auto* bench = app.add_subcommand("bench", "profile a run and emit breakdown/footprint reports");
  add_common(bench, true);
  bench->add_option("--repeats", cfg.repeats, "timing passes, best-of (default 5)");
  bench->add_option("--format", cfg.formats, "csv and/or json")->delimiter(',');
  bench->add_flag("--counters-only", cfg.counters_only,
                  "zero wall times and timestamp for byte-deterministic reports");
  auto* gen = app.add_subcommand("gen-weights", "write a seeded synthetic weight store");
  add_common(gen, false);
  auto* validate = app.add_subcommand("validate", "print the per-layer shape trace");
  add_common(validate, false);
  std::string export_path;
  validate->add_option("--export", export_path, "also write the topology as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }

  try {
    if (!json_config.empty()) apply_json_config(cfg, json_config);
    if (!prices_text.empty()) {
      cfg.prices = parse_float_list(prices_text);
      cfg.input_kind = InputKind::price_pair;
    }
    if (gen_input_seed) {
      cfg.input_kind = InputKind::synthetic;
      cfg.input_seed = *gen_input_seed;
    }
    if (!cfg.input_path.empty() && cfg.input_kind == InputKind::none) {
      cfg.input_kind =
          cfg.input_path.ends_with(".ppm") ? InputKind::ppm_image : InputKind::raw_f32;
    }
    if (!mean_text.empty()) cfg.mean_subtract = parse_float_list(mean_text);

    if (list->parsed()) return cmd_list();
    if (run->parsed()) return cmd_run(cfg);
    if (bench->parsed()) return cmd_bench(cfg);
    if (gen->parsed()) return cmd_gen_weights(cfg);
    if (validate->parsed()) return cmd_validate(cfg, export_path);
    return kExitConfig;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const WeightError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitWeights;
  } catch (const PersistenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitWeights;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInternal;
  }
}
