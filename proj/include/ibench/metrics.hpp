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

// Latency and throughput statistics over timed samples. Everything here is a
// pure function of its inputs; recording happens in loadgen.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ibench/clock.hpp"

namespace ibench {

enum class Outcome { kSuccess, kError };

struct LatencySample {
  std::uint64_t request_id = 0;
  TimestampNs intended_start = 0;
  TimestampNs actual_start = 0;
  TimestampNs end = 0;
  std::uint32_t batch_size = 1;
  Outcome outcome = Outcome::kSuccess;
  // Runner-reported timestamps are informational; they live on the runner's
  // clock and never enter latency statistics.
  std::optional<std::int64_t> runner_start_ns;
  std::optional<std::int64_t> runner_end_ns;

  bool operator==(const LatencySample&) const = default;
};

/// Throws ErrorCode::kInvalidArgument if timestamps are out of order or the
/// batch size is zero.
void validate(const LatencySample& sample);

enum class LatencyMode {
  kServiceTime,   // end - actual_start
  kResponseTime,  // end - intended_start; includes queueing delay
};

std::string_view to_string(LatencyMode mode);
LatencyMode latency_mode_from_string(std::string_view text);

DurationNs measured_interval(const LatencySample& sample, LatencyMode mode);

struct LatencyDistribution {
  LatencyMode mode = LatencyMode::kServiceTime;
  std::size_t count = 0;
  double mean_ms = 0.0;
  double head_ms = 0.0;
  double max_ms = 0.0;
  // quantile in (0, 1] -> latency in ms
  std::map<double, double> percentiles;

  double percentile(double q) const;
  double p50() const { return percentile(0.50); }
  double p95() const { return percentile(0.95); }
  double p99() const { return percentile(0.99); }

  bool operator==(const LatencyDistribution&) const = default;
};

/// Quantiles reported when the caller asks for nothing specific.
std::vector<double> default_quantiles();

/// Nearest-rank percentile: the value at 1-based index ceil(q * N) of the
/// ascending `sorted` range. q must lie in (0, 1].
double nearest_rank(std::span<const double> sorted, double q);

/// Summarizes successful samples only. Throws kEmptyInput for no samples and
/// AllSamplesFailedError when none succeeded. 0.50, 0.95 and 0.99 are always
/// reported in addition to `quantiles`.
LatencyDistribution summarize_latencies(
    std::span<const LatencySample> samples, LatencyMode mode,
    std::span<const double> quantiles = {});

struct StatsTriple {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;

  bool operator==(const StatsTriple&) const = default;
};

struct WorkloadDescriptor {
  StatsTriple batch_size_stats;
  std::optional<StatsTriple> sequence_length_stats;
  std::uint64_t total_requests = 0;
  std::uint64_t total_items = 0;

  /// Mean items per request: the B of throughput = B / L.
  double items_per_request() const;

  bool operator==(const WorkloadDescriptor&) const = default;
};

/// When `sequence_lengths` is given it must align 1:1 with `samples` and
/// total_items counts tokens instead of batch items.
WorkloadDescriptor summarize_workload(
    std::span<const LatencySample> samples,
    std::optional<std::span<const std::int64_t>> sequence_lengths =
        std::nullopt);

enum class ThroughputUnit { kSamples, kTokens, kRequests, kTransactions };
enum class ThroughputBasis { kPerBatch, kPerRequest };

std::string_view to_string(ThroughputUnit unit);
std::string_view to_string(ThroughputBasis basis);
ThroughputUnit throughput_unit_from_string(std::string_view text);
ThroughputBasis throughput_basis_from_string(std::string_view text);

struct ThroughputReading {
  double value = 0.0;  // items per second
  ThroughputUnit unit = ThroughputUnit::kSamples;
  ThroughputBasis basis = ThroughputBasis::kPerBatch;

  bool operator==(const ThroughputReading&) const = default;
};

/// value = mean items per request / mean latency in seconds.
/// Throws kInvalidMeasurement when the mean latency is not positive.
ThroughputReading compute_throughput(const LatencyDistribution& distribution,
                                     const WorkloadDescriptor& workload,
                                     ThroughputUnit unit);

}  // namespace ibench
