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

// Traffic generation and run orchestration.
//
// Open-loop runs dispatch on a precomputed Poisson schedule and never wait
// for earlier responses, so queueing delay shows up in response time
// (measured from the scheduled arrival). Closed-loop and static-batch runs
// issue the next request only when a worker's previous one completed.

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ibench/energy.hpp"
#include "ibench/error.hpp"
#include "ibench/metrics.hpp"
#include "ibench/power_source.hpp"
#include "ibench/protocol.hpp"
#include "ibench/session.hpp"

namespace ibench {

/// Name of the generator behind arrival schedules; recorded in reports.
inline constexpr std::string_view kArrivalPrng = "mt19937_64";

struct TrafficModel {
  enum class Mode { kOpenLoopPoisson, kClosedLoop, kStaticBatch };

  Mode mode = Mode::kStaticBatch;
  double rate_rps = 0.0;         // open-loop
  std::uint64_t seed = 0;        // open-loop
  std::uint32_t concurrency = 1; // closed-loop
  std::uint32_t batch_size = 1;
  std::optional<std::uint64_t> iterations;
  std::optional<double> duration_s;
  // Sent with every request when set; also switches workload item counting
  // to tokens.
  std::optional<std::int64_t> sequence_length;

  static TrafficModel open_loop(double rate_rps, double duration_s,
                                std::uint64_t seed, std::uint32_t batch_size = 1);
  static TrafficModel closed_loop(std::uint32_t concurrency,
                                  std::uint64_t iterations,
                                  std::uint32_t batch_size = 1);
  static TrafficModel static_batch(std::uint32_t batch_size,
                                   std::uint64_t iterations);

  bool operator==(const TrafficModel&) const = default;
};

std::string_view to_string(TrafficModel::Mode mode);
TrafficModel::Mode traffic_mode_from_string(std::string_view text);

/// Throws ErrorCode::kInvalidArgument.
void validate(const TrafficModel& traffic);

struct RunPlan {
  TrafficModel traffic;
  std::uint32_t warmup_iterations = 10;
  std::vector<std::uint32_t> batch_sweep;
  PowerSourceConfig power;
  CarbonFactors carbon;
  std::string output_path;
  std::chrono::milliseconds request_timeout{60000};
  std::size_t max_in_flight = 1024;
};

/// Throws ErrorCode::kInvalidArgument.
void validate(const RunPlan& plan);

/// Intended-start offsets (ns from run start) of a Poisson process:
/// exponential inter-arrivals with mean 1/rate, by inverse CDF on
/// mt19937_64, truncated at `duration_s`. Deterministic in `seed`.
std::vector<DurationNs> generate_arrivals(double rate_rps, double duration_s,
                                          std::uint64_t seed);

struct RunRecord {
  Handshake handshake;
  TrafficModel traffic;
  std::uint32_t warmup_iterations = 0;
  std::vector<LatencySample> samples;
  // One entry per sample when the traffic carries a sequence length.
  std::vector<std::int64_t> sequence_lengths;
  PowerTrace trace;
  // First measured intended_start to last measured end.
  TimeWindow energy_window;
  // Set when the run did not complete; samples may be partial.
  std::optional<std::string> failure;

  std::size_t error_count() const;
};

/// Raised when the runner goes away mid-run. Carries what completed.
class PartialRunError : public Error {
 public:
  PartialRunError(const std::string& message, RunRecord partial)
      : Error(ErrorCode::kPartialRun, message), partial_(std::move(partial)) {}
  const RunRecord& partial() const { return partial_; }

 private:
  RunRecord partial_;
};

/// Warmup (discarded), then measurement with power sampling spanning every
/// measured request. Timed-out requests become error samples.
RunRecord execute_run(const RunPlan& plan, RunnerSession& session);

/// One execute_run per batch size. A failed batch size yields a record with
/// `failure` set and the sweep moves on.
std::vector<RunRecord> run_batch_sweep(const RunPlan& plan,
                                       RunnerSession& session);

}  // namespace ibench
