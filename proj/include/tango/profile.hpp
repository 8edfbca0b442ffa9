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

#ifndef TANGO_PROFILE_HPP
#define TANGO_PROFILE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tango/counters.hpp"
#include "tango/tensor.hpp"

namespace tango {

struct NetworkGraph;
struct WeightStore;
struct ShapeTraceEntry;

/// One executed layer: wall time, semantic operation counters, and the
/// 4-byte data traffic implied by them. Counters are deterministic for a
/// fixed (layer, shape); wall time is not.
struct ProfileRecord {
  std::string layer;
  std::string type;  // breakdown key: conv, pool, fc, norm, fire_squeeze, ...
  std::uint64_t wall_ns = 0;
  OpCounters counters;
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;
};

struct RunMetadata {
  int workers = 0;
  std::uint64_t seed = 0;
  std::int64_t timestamp = 0;  // unix seconds; 0 = unset (deterministic output)
};

/// Per-layer-type aggregation of a profiled run. `time_share` is over
/// total wall time, `op_share` over total arithmetic operations
/// (load/store excluded); each sums to 1 when its total is non-zero.
struct BreakdownReport {
  struct TypeRow {
    std::string layer_type;
    double time_share = 0.0;
    double op_share = 0.0;
    OpCounters counters;
  };

  std::string network;
  std::vector<TypeRow> rows;  // sorted by layer_type
  OpCounters totals;
  std::uint64_t total_wall_ns = 0;
  RunMetadata meta;
};

struct MemoryFootprint {
  std::string network;
  std::uint64_t weight_bytes = 0;
  std::uint64_t peak_activation_bytes = 0;
  std::uint64_t total_bytes = 0;  // weights + peak activations
};

enum class ReportFormat { csv, json };
ReportFormat report_format_from_name(const std::string& name);

/// Runs inference `repeats` times: wall times are the per-layer minimum
/// over the repeats, counters come from a single pass (they are
/// deterministic).
std::vector<ProfileRecord> profile_run(const NetworkGraph& g, const WeightStore& w,
                                       const Tensor& input, int repeats, ExecContext& ctx);

BreakdownReport breakdown_by_layer_type(const std::vector<ProfileRecord>& records);

/// Arithmetic categories ranked by descending share of the arithmetic
/// total, ties broken by category name; at most k entries.
std::vector<std::pair<std::string, double>> top_ops(const BreakdownReport& report, int k);

/// Analytic memory footprint: weight bytes from the parameter count,
/// peak activation bytes from a liveness walk over the schedule. Matches
/// what the runtime accountant observes during run_inference.
MemoryFootprint footprint(const NetworkGraph& g);

/// Zeroes every wall-time field so derived reports are byte-deterministic.
std::vector<ProfileRecord> strip_timing(std::vector<ProfileRecord> records);

// Fold used by profile_run to combine repeated passes (exposed for tests).
std::vector<ProfileRecord> min_time_fold(std::vector<ProfileRecord> acc,
                                         const std::vector<ProfileRecord>& next);

std::string emit_report(const BreakdownReport& report, ReportFormat format);
std::string emit_report(const MemoryFootprint& fp, ReportFormat format);
std::string emit_report(const std::vector<ShapeTraceEntry>& trace, ReportFormat format);

}  // namespace tango

#endif  // TANGO_PROFILE_HPP
