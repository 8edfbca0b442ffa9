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

#include "tango/profile.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include <json.hpp>

#include "tango/error.hpp"
#include "tango/graph.hpp"
#include "tango/weights.hpp"

namespace tango {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

constexpr const char* kCrlf = "\r\n";

nlohmann::ordered_json counters_to_json(const OpCounters& c) {
  nlohmann::ordered_json j;
  for (OpCategory cat : kAllOpCategories) j[to_string(cat)] = c[cat];
  return j;
}

}  // namespace

ReportFormat report_format_from_name(const std::string& name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw UsageError("unsupported report format '" + name + "' (expected csv or json)");
}

std::vector<ProfileRecord> min_time_fold(std::vector<ProfileRecord> acc,
                                         const std::vector<ProfileRecord>& next) {
  if (acc.size() != next.size()) throw ReportError("repeat passes produced different layer lists");
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (acc[i].layer != next[i].layer) {
      throw ReportError("repeat passes disagree at layer '" + acc[i].layer + "'");
    }
    acc[i].wall_ns = std::min(acc[i].wall_ns, next[i].wall_ns);
  }
  return acc;
}

std::vector<ProfileRecord> strip_timing(std::vector<ProfileRecord> records) {
  for (auto& r : records) r.wall_ns = 0;
  return records;
}

std::vector<ProfileRecord> profile_run(const NetworkGraph& g, const WeightStore& w,
                                       const Tensor& input, int repeats, ExecContext& ctx) {
  if (repeats < 1) throw UsageError("repeats must be >= 1");
  auto records = run_inference(g, w, input, ctx).profile;
  for (int r = 1; r < repeats; ++r) {
    records = min_time_fold(std::move(records), run_inference(g, w, input, ctx).profile);
  }
  return records;
}

BreakdownReport breakdown_by_layer_type(const std::vector<ProfileRecord>& records) {
  if (records.empty()) throw ReportError("cannot aggregate an empty profile");
  BreakdownReport report;
  std::map<std::string, OpCounters> counters;
  std::map<std::string, std::uint64_t> wall;
  for (const auto& rec : records) {
    counters[rec.type] += rec.counters;
    wall[rec.type] += rec.wall_ns;
    report.totals += rec.counters;
    report.total_wall_ns += rec.wall_ns;
  }
  const auto total_arith = report.totals.arithmetic_total();
  for (const auto& [type, c] : counters) {
    BreakdownReport::TypeRow row;
    row.layer_type = type;
    row.counters = c;
    row.time_share = report.total_wall_ns
                         ? static_cast<double>(wall[type]) / static_cast<double>(report.total_wall_ns)
                         : 0.0;
    row.op_share = total_arith
                       ? static_cast<double>(c.arithmetic_total()) / static_cast<double>(total_arith)
                       : 0.0;
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<std::pair<std::string, double>> top_ops(const BreakdownReport& report, int k) {
  if (k < 1) throw UsageError("top_ops needs k >= 1");
  const auto total = report.totals.arithmetic_total();
  std::vector<std::pair<std::string, double>> ranked;
  for (OpCategory cat : kAllOpCategories) {
    if (cat == OpCategory::load || cat == OpCategory::store) continue;
    const double share =
        total ? static_cast<double>(report.totals[cat]) / static_cast<double>(total) : 0.0;
    ranked.emplace_back(to_string(cat), share);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (static_cast<int>(ranked.size()) > k) ranked.resize(static_cast<std::size_t>(k));
  return ranked;
}

MemoryFootprint footprint(const NetworkGraph& g) {
  MemoryFootprint fp;
  fp.network = to_string(g.id);
  fp.weight_bytes = static_cast<std::uint64_t>(count_parameters(g).total) * sizeof(float);

  // Liveness walk mirroring run_inference: a layer's output is allocated
  // while its inputs are still retained; inputs are released once their
  // last consumer has run. Fire stages release the module input after the
  // squeeze and drop the squeeze tensor once both expands are done.
  const auto trace = validate_shapes(g, g.input_shape);
  const auto order = schedule_indexes(g);
  std::vector<int> refcount(g.nodes.size(), 0);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    refcount[i] = static_cast<int>(g.successors(static_cast<int>(i)).size());
  }

  std::uint64_t live = static_cast<std::uint64_t>(g.input_shape.count()) * sizeof(float);
  std::uint64_t peak = live;
  std::vector<std::uint64_t> held(g.nodes.size(), 0);
  bool input_live = true;

  for (std::size_t k = 0; k < order.size(); ++k) {
    const int idx = order[k];
    const auto& node = g.nodes[static_cast<std::size_t>(idx)];
    const auto preds = g.predecessors(idx);
    const std::uint64_t out_bytes =
        static_cast<std::uint64_t>(trace[k].output.count()) * sizeof(float);

    const auto release_inputs = [&] {
      if (preds.empty()) {
        if (input_live) live -= static_cast<std::uint64_t>(g.input_shape.count()) * sizeof(float);
        input_live = false;
        return;
      }
      for (int p : preds) {
        if (--refcount[static_cast<std::size_t>(p)] == 0) {
          live -= held[static_cast<std::size_t>(p)];
          held[static_cast<std::size_t>(p)] = 0;
        }
      }
    };

    if (node.kind == LayerKind::fire) {
      const auto& f = std::get<FireSpec>(node.params);
      const Shape& in_shape = trace[k].inputs[0];
      const std::uint64_t squeeze_bytes = static_cast<std::uint64_t>(f.squeeze.out_channels) *
                                          in_shape.height() * in_shape.width() * sizeof(float);
      live += squeeze_bytes;
      peak = std::max(peak, live);
      release_inputs();
      live += out_bytes;
      peak = std::max(peak, live);
      live -= squeeze_bytes;
    } else {
      live += out_bytes;
      peak = std::max(peak, live);
      release_inputs();
    }
    held[static_cast<std::size_t>(idx)] = out_bytes;
  }

  fp.peak_activation_bytes = peak;
  fp.total_bytes = fp.weight_bytes + fp.peak_activation_bytes;
  return fp;
}

std::string emit_report(const BreakdownReport& report, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::string out = "layer_type,time_share,op_share";
    for (OpCategory cat : kAllOpCategories) out += std::string(",") + to_string(cat);
    out += kCrlf;
    for (const auto& row : report.rows) {
      out += row.layer_type;
      out += ',' + fmt_double(row.time_share);
      out += ',' + fmt_double(row.op_share);
      for (OpCategory cat : kAllOpCategories) out += ',' + std::to_string(row.counters[cat]);
      out += kCrlf;
    }
    return out;
  }
  nlohmann::ordered_json j;
  j["network"] = report.network;
  j["metadata"] = {{"workers", report.meta.workers},
                   {"seed", report.meta.seed},
                   {"timestamp", report.meta.timestamp}};
  j["total_wall_ns"] = report.total_wall_ns;
  j["totals"] = counters_to_json(report.totals);
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    j["rows"].push_back({{"layer_type", row.layer_type},
                         {"time_share", row.time_share},
                         {"op_share", row.op_share},
                         {"counters", counters_to_json(row.counters)}});
  }
  return j.dump(2) + "\n";
}

std::string emit_report(const MemoryFootprint& fp, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::string out = "network,weight_bytes,peak_activation_bytes,total_bytes";
    out += kCrlf;
    out += fp.network + ',' + std::to_string(fp.weight_bytes) + ',' +
           std::to_string(fp.peak_activation_bytes) + ',' + std::to_string(fp.total_bytes);
    out += kCrlf;
    return out;
  }
  nlohmann::ordered_json j;
  j["network"] = fp.network;
  j["weight_bytes"] = fp.weight_bytes;
  j["peak_activation_bytes"] = fp.peak_activation_bytes;
  j["total_bytes"] = fp.total_bytes;
  return j.dump(2) + "\n";
}

std::string emit_report(const std::vector<ShapeTraceEntry>& trace, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::string out = "layer,inputs,output";
    out += kCrlf;
    for (const auto& e : trace) {
      std::string ins;
      for (std::size_t i = 0; i < e.inputs.size(); ++i) {
        if (i) ins += '+';
        ins += e.inputs[i].to_string();
      }
      out += e.layer + ',' + ins + ',' + e.output.to_string() + kCrlf;
    }
    return out;
  }
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& e : trace) {
    nlohmann::ordered_json ins = nlohmann::ordered_json::array();
    for (const auto& s : e.inputs) ins.push_back(s.to_string());
    j.push_back({{"layer", e.layer}, {"inputs", std::move(ins)}, {"output", e.output.to_string()}});
  }
  return j.dump(2) + "\n";
}

}  // namespace tango
