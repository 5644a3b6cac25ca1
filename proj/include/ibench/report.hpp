/* Copyright 2026 The ibench Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Benchmark records, Pareto analysis and report emission.
//
// Values keep full precision everywhere except rendered tables.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ibench/energy.hpp"
#include "ibench/loadgen.hpp"
#include "ibench/metrics.hpp"
#include "ibench/protocol.hpp"

namespace ibench {

inline constexpr int kReportVersion = 1;

/// A run is flagged invalid when more than this share of measured requests
/// failed.
inline constexpr double kInvalidErrorRate = 0.10;

struct BenchmarkRecord {
  std::string model_name;
  std::string platform;
  Precision precision = Precision::kFP32;
  ItemKind item_kind = ItemKind::kSample;
  DeviceAnnotations device;
  TrafficModel traffic;
  std::string arrival_prng{kArrivalPrng};
  std::uint32_t warmup_iterations = 0;
  WorkloadDescriptor workload;
  // Reported latency: response time, so open-loop queueing is included.
  LatencyDistribution latency;
  // Drives throughput = B / L.
  LatencyDistribution service_latency;
  ThroughputReading throughput;
  EnergyReading energy;
  CarbonReading carbon;
  std::string power_source;
  std::optional<AccuracyMetadata> accuracy;
  std::uint64_t measured_requests = 0;
  std::uint64_t error_count = 0;
  std::uint64_t seed = 0;
  std::string config_fingerprint;

  bool invalid() const;
  bool operator==(const BenchmarkRecord&) const = default;
};

struct RecordOptions {
  std::uint64_t seed = 0;
  std::string config_fingerprint;
  // Extra quantiles beyond the always-reported 0.50/0.95/0.99.
  std::vector<double> quantiles = default_quantiles();
};

/// Joins a completed run with carbon factors. Throws AllSamplesFailedError
/// when no request succeeded and the energy errors of integrate_energy.
BenchmarkRecord make_record(const RunRecord& run, const CarbonFactors& factors,
                            const RecordOptions& options);

/// A batch size (or run) that produced no record.
struct RunFailure {
  std::uint32_t batch_size = 0;
  std::string message;

  bool operator==(const RunFailure&) const = default;
};

struct ReportDocument {
  std::vector<BenchmarkRecord> records;
  std::vector<RunFailure> failures;

  bool operator==(const ReportDocument&) const = default;
};

// ---- Pareto ----------------------------------------------------------------

enum class Direction { kMinimize, kMaximize };

struct Objective {
  std::string metric;
  Direction direction = Direction::kMinimize;
};

/// Metric names usable as objectives:
///   latency_mean, latency_p50, latency_p95, latency_p99, throughput,
///   energy_wh, carbon_g, energy_per_item_j, carbon_per_item_mg, accuracy
std::vector<std::string_view> known_metrics();

/// Value of `metric` on `record`; nullopt when the record lacks it (accuracy)
/// or it is not finite. Throws ErrorCode::kConfig for an unknown metric.
std::optional<double> metric_value(const BenchmarkRecord& record,
                                   std::string_view metric);

/// Parses "metric:min" / "metric:max". Throws ErrorCode::kConfig.
Objective parse_objective(std::string_view text);

/// latency_<pareto_latency> min, throughput max, per-item energy and carbon
/// min, plus accuracy max when every record declares one.
std::vector<Objective> default_objectives(
    std::span<const BenchmarkRecord> records,
    std::string_view pareto_latency = "p95");

struct ParetoPoint {
  std::size_t record_index = 0;  // into the input list
  std::vector<double> objectives;
  bool dominated = false;
  // A frontier point that dominates this one.
  std::optional<std::size_t> dominated_by;
};

struct ParetoAnalysis {
  std::vector<ParetoPoint> points;  // input order; excluded records omitted
  std::vector<std::string> warnings;

  std::vector<std::size_t> frontier() const;  // record indices
};

/// Strict Pareto dominance. Equal objective vectors never dominate each
/// other. Throws ErrorCode::kConfig for an empty objective list.
ParetoAnalysis pareto_frontier(std::span<const BenchmarkRecord> records,
                               std::span<const Objective> objectives);

/// True when `a` is no worse than `b` in every objective and strictly better
/// in one. Both vectors are in the objectives' native directions.
bool dominates(std::span<const double> a, std::span<const double> b,
               std::span<const Objective> objectives);

// ---- Tables ----------------------------------------------------------------

enum class TableFormat { kText, kCsv };

struct TableOptions {
  bool color = false;
};

/// Text: Model | Platform & Precision | Throughput | Latency (ms) |
/// Energy (Wh) | CE (mg) [| Accuracy] with invalid rows marked. CSV adds
/// units, percentiles, traffic and reproducibility columns.
std::string emit_table(std::span<const BenchmarkRecord> records,
                       TableFormat format, TableOptions options = {});

std::string render_frontier(std::span<const BenchmarkRecord> records,
                            const ParetoAnalysis& analysis,
                            std::span<const Objective> objectives);

/// Stable sort by model name, then precision, then platform.
void sort_for_report(std::vector<BenchmarkRecord>& records);

// ---- CSV -------------------------------------------------------------------

struct CsvCell {
  std::string text;
  bool quoted = false;

  bool operator==(const CsvCell&) const = default;
};

using CsvRow = std::vector<CsvCell>;

/// Header plus rows; LF endings, quotes doubled inside quoted cells.
std::string write_csv(std::span<const CsvRow> rows);
/// Throws ParseError with a 1-based line number.
std::vector<CsvRow> parse_csv(std::string_view text);

// ---- JSON ------------------------------------------------------------------

std::string emit_json(const ReportDocument& document);
/// Throws ParseError for malformed JSON and ErrorCode::kParse, naming the
/// key path, for a schema mismatch.
ReportDocument load_json(std::string_view text);

}  // namespace ibench
