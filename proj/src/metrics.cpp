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

#include "ibench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "ibench/error.hpp"

namespace ibench {

namespace {

constexpr double kRequiredQuantiles[] = {0.50, 0.95, 0.99};

StatsTriple triple_of(std::span<const double> values) {
  StatsTriple t;
  t.min = *std::min_element(values.begin(), values.end());
  t.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  t.mean = sum / static_cast<double>(values.size());
  // Rounding in the sum can push the mean a hair outside [min, max] when all
  // values are equal.
  t.mean = std::clamp(t.mean, t.min, t.max);
  return t;
}

}  // namespace

void validate(const LatencySample& sample) {
  if (sample.batch_size == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("request {}: batch_size must be >= 1",
                            sample.request_id));
  }
  if (sample.actual_start < sample.intended_start ||
      sample.end < sample.actual_start) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("request {}: timestamps must satisfy end >= "
                            "actual_start >= intended_start",
                            sample.request_id));
  }
}

std::string_view to_string(LatencyMode mode) {
  return mode == LatencyMode::kServiceTime ? "service-time" : "response-time";
}

LatencyMode latency_mode_from_string(std::string_view text) {
  if (text == "service-time") return LatencyMode::kServiceTime;
  if (text == "response-time") return LatencyMode::kResponseTime;
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown latency mode '{}'", text));
}

DurationNs measured_interval(const LatencySample& sample, LatencyMode mode) {
  return mode == LatencyMode::kServiceTime ? sample.end - sample.actual_start
                                           : sample.end - sample.intended_start;
}

double LatencyDistribution::percentile(double q) const {
  auto it = percentiles.find(q);
  if (it == percentiles.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("quantile {} was not computed", q));
  }
  return it->second;
}

std::vector<double> default_quantiles() {
  return {0.50, 0.90, 0.95, 0.99, 0.999};
}

double nearest_rank(std::span<const double> sorted, double q) {
  if (sorted.empty()) {
    throw Error(ErrorCode::kEmptyInput, "nearest_rank of an empty sample");
  }
  if (!(q > 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("quantile {} outside (0, 1]", q));
  }
  const double n = static_cast<double>(sorted.size());
  const double position = q * n;
  // Products such as 0.07 * 100 land a few ulps above the integer rank.
  auto rank = static_cast<std::size_t>(std::ceil(position - position * 1e-12));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

LatencyDistribution summarize_latencies(std::span<const LatencySample> samples,
                                        LatencyMode mode,
                                        std::span<const double> quantiles) {
  if (samples.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no latency samples to summarize");
  }

  std::vector<DurationNs> intervals;
  intervals.reserve(samples.size());
  for (const auto& sample : samples) {
    validate(sample);
    if (sample.outcome == Outcome::kSuccess) {
      intervals.push_back(measured_interval(sample, mode));
    }
  }
  if (intervals.empty()) throw AllSamplesFailedError(samples.size());

  std::sort(intervals.begin(), intervals.end());
  std::vector<double> sorted_ms;
  sorted_ms.reserve(intervals.size());
  // Integer nanosecond sum is exact; divide once at the end.
  long double total_ns = 0;
  for (DurationNs ns : intervals) {
    sorted_ms.push_back(static_cast<double>(ns) / kNsPerMs);
    total_ns += static_cast<long double>(ns);
  }

  LatencyDistribution d;
  d.mode = mode;
  d.count = sorted_ms.size();
  d.head_ms = sorted_ms.front();
  d.max_ms = sorted_ms.back();
  d.mean_ms = static_cast<double>(total_ns /
                                  static_cast<long double>(d.count) / 1e6L);
  d.mean_ms = std::clamp(d.mean_ms, d.head_ms, d.max_ms);

  for (double q : kRequiredQuantiles) d.percentiles[q] = nearest_rank(sorted_ms, q);
  for (double q : quantiles) d.percentiles[q] = nearest_rank(sorted_ms, q);
  return d;
}

double WorkloadDescriptor::items_per_request() const {
  if (total_requests == 0) return 0.0;
  return static_cast<double>(total_items) /
         static_cast<double>(total_requests);
}

WorkloadDescriptor summarize_workload(
    std::span<const LatencySample> samples,
    std::optional<std::span<const std::int64_t>> sequence_lengths) {
  if (samples.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no samples to describe");
  }
  if (sequence_lengths && sequence_lengths->size() != samples.size()) {
    throw Error(ErrorCode::kShape,
                fmt::format("{} sequence lengths for {} samples",
                            sequence_lengths->size(), samples.size()));
  }

  WorkloadDescriptor w;
  std::vector<double> batches;
  batches.reserve(samples.size());
  for (const auto& sample : samples) {
    if (sample.batch_size == 0) {
      throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
    }
    batches.push_back(sample.batch_size);
    w.total_items += sample.batch_size;
  }
  w.batch_size_stats = triple_of(batches);
  w.total_requests = samples.size();

  if (sequence_lengths) {
    std::vector<double> lengths;
    lengths.reserve(sequence_lengths->size());
    std::uint64_t tokens = 0;
    for (std::int64_t len : *sequence_lengths) {
      if (len < 0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "sequence lengths must be non-negative");
      }
      lengths.push_back(static_cast<double>(len));
      tokens += static_cast<std::uint64_t>(len);
    }
    w.sequence_length_stats = triple_of(lengths);
    w.total_items = tokens;
  }
  return w;
}

std::string_view to_string(ThroughputUnit unit) {
  switch (unit) {
    case ThroughputUnit::kSamples: return "samples/s";
    case ThroughputUnit::kTokens: return "tokens/s";
    case ThroughputUnit::kRequests: return "requests/s";
    case ThroughputUnit::kTransactions: return "transactions/s";
  }
  return "?";
}

std::string_view to_string(ThroughputBasis basis) {
  return basis == ThroughputBasis::kPerBatch ? "per-batch" : "per-request";
}

ThroughputUnit throughput_unit_from_string(std::string_view text) {
  for (auto u : {ThroughputUnit::kSamples, ThroughputUnit::kTokens,
                 ThroughputUnit::kRequests, ThroughputUnit::kTransactions}) {
    if (to_string(u) == text) return u;
  }
  throw Error(ErrorCode::kUnit, fmt::format("unknown throughput unit '{}'", text));
}

ThroughputBasis throughput_basis_from_string(std::string_view text) {
  if (text == "per-batch") return ThroughputBasis::kPerBatch;
  if (text == "per-request") return ThroughputBasis::kPerRequest;
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown throughput basis '{}'", text));
}

ThroughputReading compute_throughput(const LatencyDistribution& distribution,
                                     const WorkloadDescriptor& workload,
                                     ThroughputUnit unit) {
  if (!(distribution.mean_ms > 0.0)) {
    throw Error(ErrorCode::kInvalidMeasurement,
                fmt::format("mean latency must be positive (got {} ms)",
                            distribution.mean_ms));
  }
  if (workload.total_requests == 0) {
    throw Error(ErrorCode::kInvalidMeasurement,
                "workload has no requests; batch statistics missing");
  }
  ThroughputReading r;
  r.value = workload.items_per_request() / (distribution.mean_ms / 1e3);
  r.unit = unit;
  r.basis = unit == ThroughputUnit::kRequests ? ThroughputBasis::kPerRequest
                                              : ThroughputBasis::kPerBatch;
  return r;
}

}  // namespace ibench
