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

#include <algorithm>
#include <random>

#include <doctest.h>

#include "ibench/metrics.hpp"
#include "test_util.hpp"

using namespace ibench;
using ibench::testing::code_of;
using ibench::testing::relative_close;
using ibench::testing::sample_ns;

namespace {

constexpr DurationNs kMs = 1'000'000;

std::vector<LatencySample> samples_from_ms(const std::vector<int>& ms) {
  std::vector<LatencySample> out;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    out.push_back(sample_ns(i, ms[i] * kMs));
  }
  return out;
}

// Independent oracle: integer nanoseconds, quantile given in thousandths,
// rank = ceil(k * N / 1000) computed exactly in integers.
double oracle_percentile(std::vector<DurationNs> ns, int k_per_mille) {
  std::sort(ns.begin(), ns.end());
  const std::size_t n = ns.size();
  const std::size_t rank = (static_cast<std::size_t>(k_per_mille) * n + 999) / 1000;
  return static_cast<double>(ns[std::max<std::size_t>(rank, 1) - 1]) / 1e6;
}

}  // namespace

TEST_CASE("single sample collapses every statistic") {
  const auto d = summarize_latencies(samples_from_ms({10}), LatencyMode::kServiceTime);
  CHECK(d.count == 1);
  CHECK(d.mean_ms == 10.0);
  CHECK(d.head_ms == 10.0);
  CHECK(d.p50() == 10.0);
  CHECK(d.p95() == 10.0);
  CHECK(d.p99() == 10.0);
  CHECK(d.max_ms == 10.0);
}

TEST_CASE("1..100 ms gives nearest-rank percentiles") {
  std::vector<int> ms(100);
  for (int i = 0; i < 100; ++i) ms[i] = i + 1;
  const auto d = summarize_latencies(samples_from_ms(ms), LatencyMode::kServiceTime);
  CHECK(d.mean_ms == doctest::Approx(50.5).epsilon(1e-12));
  CHECK(d.head_ms == 1.0);
  CHECK(d.p50() == 50.0);
  CHECK(d.p95() == 95.0);
  CHECK(d.p99() == 99.0);
  CHECK(d.max_ms == 100.0);
}

TEST_CASE("default quantiles are all reported") {
  std::vector<int> ms(1000);
  for (int i = 0; i < 1000; ++i) ms[i] = i + 1;
  const auto d = summarize_latencies(samples_from_ms(ms), LatencyMode::kServiceTime,
                                     default_quantiles());
  for (double q : default_quantiles()) CHECK(d.percentiles.count(q) == 1);
  CHECK(d.percentile(0.999) == 999.0);
  CHECK(d.percentile(0.9) == 900.0);
}

TEST_CASE("failed samples are excluded but distinguished from empty input") {
  auto s = samples_from_ms({5, 7, 9});
  s[1].outcome = Outcome::kError;
  const auto d = summarize_latencies(s, LatencyMode::kServiceTime);
  CHECK(d.count == 2);
  CHECK(d.mean_ms == 7.0);

  CHECK(code_of([] { summarize_latencies({}, LatencyMode::kServiceTime); }) ==
        ErrorCode::kEmptyInput);
  for (auto& x : s) x.outcome = Outcome::kError;
  try {
    summarize_latencies(s, LatencyMode::kServiceTime);
    FAIL("expected AllSamplesFailedError");
  } catch (const AllSamplesFailedError& e) {
    CHECK(e.failure_count() == 3);
    CHECK(e.code() == ErrorCode::kAllSamplesFailed);
  }
}

TEST_CASE("interval selection by mode") {
  const auto s = sample_ns(1, 4 * kMs, 6 * kMs);
  CHECK(measured_interval(s, LatencyMode::kServiceTime) == 4 * kMs);
  CHECK(measured_interval(s, LatencyMode::kResponseTime) == 10 * kMs);
}

TEST_CASE("sample validation") {
  auto s = sample_ns(1, kMs);
  s.actual_start = s.intended_start - 1;
  CHECK(code_of([&] { validate(s); }) == ErrorCode::kInvalidArgument);
  s = sample_ns(1, kMs);
  s.batch_size = 0;
  CHECK(code_of([&] { validate(s); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("nearest_rank guards against floating products") {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i + 1;
  // 0.07 * 100 evaluates to 7.000000000000001.
  CHECK(nearest_rank(v, 0.07) == 7.0);
  CHECK(nearest_rank(v, 0.29) == 29.0);
  CHECK(nearest_rank(v, 1.0) == 100.0);
  CHECK(nearest_rank(v, 0.001) == 1.0);
  CHECK(code_of([&] { nearest_rank(v, 0.0); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { nearest_rank({}, 0.5); }) == ErrorCode::kEmptyInput);
}

TEST_CASE("property: percentiles match the sort-and-index oracle") {
  std::mt19937_64 rng(20260101);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 2000;
    std::vector<DurationNs> ns(n);
    std::vector<LatencySample> samples;
    for (std::size_t i = 0; i < n; ++i) {
      ns[i] = 1 + static_cast<DurationNs>(rng() % 50'000'000);
      samples.push_back(sample_ns(i, ns[i]));
    }
    std::vector<double> qs;
    std::vector<int> ks;
    for (int j = 0; j < 6; ++j) {
      const int k = 1 + static_cast<int>(rng() % 1000);
      ks.push_back(k);
      qs.push_back(k / 1000.0);
    }
    const auto d = summarize_latencies(samples, LatencyMode::kServiceTime, qs);
    for (std::size_t j = 0; j < ks.size(); ++j) {
      REQUIRE(d.percentile(qs[j]) == oracle_percentile(ns, ks[j]));
    }
    // Monotone in q and bounded by head and max.
    double prev = d.head_ms;
    for (const auto& [q, v] : d.percentiles) {
      REQUIRE(v >= prev);
      prev = v;
    }
    REQUIRE(prev <= d.max_ms);
    REQUIRE(d.head_ms <= d.mean_ms);
    REQUIRE(d.mean_ms <= d.max_ms);
  }
}

TEST_CASE("property: summarize_latencies is permutation invariant") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LatencySample> s;
    const std::size_t n = 1 + rng() % 500;
    for (std::size_t i = 0; i < n; ++i) {
      s.push_back(sample_ns(i, 1 + static_cast<DurationNs>(rng() % 10'000'000),
                            static_cast<DurationNs>(rng() % 1000)));
    }
    const auto a = summarize_latencies(s, LatencyMode::kResponseTime, default_quantiles());
    std::shuffle(s.begin(), s.end(), rng);
    const auto b = summarize_latencies(s, LatencyMode::kResponseTime, default_quantiles());
    REQUIRE(a == b);
  }
}

TEST_CASE("property: response time dominates service time per sample") {
  std::mt19937_64 rng(11);
  std::vector<LatencySample> s;
  for (int i = 0; i < 1000; ++i) {
    s.push_back(sample_ns(i, 1 + static_cast<DurationNs>(rng() % 1'000'000),
                          static_cast<DurationNs>(rng() % 1'000'000)));
  }
  for (const auto& x : s) {
    CHECK(measured_interval(x, LatencyMode::kResponseTime) >=
          measured_interval(x, LatencyMode::kServiceTime));
  }
  const auto svc = summarize_latencies(s, LatencyMode::kServiceTime);
  const auto rsp = summarize_latencies(s, LatencyMode::kResponseTime);
  CHECK(rsp.mean_ms >= svc.mean_ms);
  CHECK(rsp.head_ms >= svc.head_ms);
}

TEST_CASE("workload descriptors") {
  SUBCASE("constant batch") {
    std::vector<LatencySample> s;
    for (int i = 0; i < 5; ++i) s.push_back(sample_ns(i, kMs, 0, 100));
    const auto w = summarize_workload(s);
    CHECK(w.batch_size_stats == StatsTriple{100, 100, 100});
    CHECK(w.total_requests == 5);
    CHECK(w.total_items == 500);
    CHECK_FALSE(w.sequence_length_stats.has_value());
  }
  SUBCASE("mixed batches") {
    std::vector<LatencySample> s{sample_ns(0, kMs, 0, 1), sample_ns(1, kMs, 0, 8),
                                 sample_ns(2, kMs, 0, 32)};
    const auto w = summarize_workload(s);
    CHECK(w.batch_size_stats.min == 1);
    CHECK(w.batch_size_stats.mean == doctest::Approx(41.0 / 3.0));
    CHECK(w.batch_size_stats.max == 32);
    CHECK(w.total_items == 41);
  }
  SUBCASE("token lengths") {
    std::vector<LatencySample> s{sample_ns(0, kMs), sample_ns(1, kMs)};
    const std::vector<std::int64_t> tokens{128, 256};
    const auto w = summarize_workload(s, std::span<const std::int64_t>(tokens));
    REQUIRE(w.sequence_length_stats.has_value());
    CHECK(*w.sequence_length_stats == StatsTriple{128, 192, 256});
    CHECK(w.total_items == 384);
    CHECK(w.total_items >= w.total_requests);
  }
  SUBCASE("misaligned lengths") {
    std::vector<LatencySample> s{sample_ns(0, kMs), sample_ns(1, kMs)};
    const std::vector<std::int64_t> tokens{128};
    CHECK(code_of([&] {
            summarize_workload(s, std::span<const std::int64_t>(tokens));
          }) == ErrorCode::kShape);
  }
}

TEST_CASE("throughput is B over L") {
  auto make = [](double mean_ms, double batch) {
    LatencyDistribution d;
    d.mean_ms = mean_ms;
    WorkloadDescriptor w;
    w.total_requests = 10;
    w.total_items = static_cast<std::uint64_t>(batch * 10);
    return std::pair{d, w};
  };
  SUBCASE("table row: B=100, L=12.61 ms") {
    auto [d, w] = make(12.61, 100);
    const auto t = compute_throughput(d, w, ThroughputUnit::kSamples);
    CHECK(t.value == doctest::Approx(100.0 / 0.01261).epsilon(1e-12));
    CHECK(relative_close(t.value, 7922.41, 0.005));
    CHECK(t.basis == ThroughputBasis::kPerBatch);
  }
  SUBCASE("table row: B=100, L=33.29 ms") {
    auto [d, w] = make(33.29, 100);
    const auto t = compute_throughput(d, w, ThroughputUnit::kSamples);
    CHECK(t.value == doctest::Approx(3003.9).epsilon(1e-4));
    CHECK(relative_close(t.value, 3004.10, 0.005));
  }
  SUBCASE("unit case") {
    auto [d, w] = make(1000.0, 1);
    const auto t = compute_throughput(d, w, ThroughputUnit::kRequests);
    CHECK(t.value == 1.0);
    CHECK(t.unit == ThroughputUnit::kRequests);
    CHECK(t.basis == ThroughputBasis::kPerRequest);
  }
  SUBCASE("non-positive latency") {
    auto [d, w] = make(0.0, 1);
    CHECK(code_of([&] { compute_throughput(d, w, ThroughputUnit::kSamples); }) ==
          ErrorCode::kInvalidMeasurement);
  }
}

TEST_CASE("property: constant service time round-trips through B/L") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const DurationNs s_ns = 1 + static_cast<DurationNs>(rng() % 100'000'000);
    const std::uint32_t batch = 1 + static_cast<std::uint32_t>(rng() % 512);
    std::vector<LatencySample> samples;
    const std::size_t n = 1 + rng() % 100;
    for (std::size_t i = 0; i < n; ++i) samples.push_back(sample_ns(i, s_ns, 0, batch));
    const auto d = summarize_latencies(samples, LatencyMode::kServiceTime);
    const auto t = compute_throughput(d, summarize_workload(samples),
                                      ThroughputUnit::kSamples);
    const double expected = batch / (static_cast<double>(s_ns) / 1e9);
    REQUIRE(relative_close(t.value, expected, 1e-9));
  }
}

TEST_CASE("unit names round-trip") {
  for (auto u : {ThroughputUnit::kSamples, ThroughputUnit::kTokens,
                 ThroughputUnit::kRequests, ThroughputUnit::kTransactions}) {
    CHECK(throughput_unit_from_string(to_string(u)) == u);
  }
  CHECK(code_of([] { throughput_unit_from_string("furlongs/s"); }) == ErrorCode::kUnit);
  CHECK(latency_mode_from_string(to_string(LatencyMode::kResponseTime)) ==
        LatencyMode::kResponseTime);
}
