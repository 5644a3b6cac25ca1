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

#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <doctest.h>

#include "ibench/power_source.hpp"
#include "test_util.hpp"

using namespace ibench;
using namespace std::chrono_literals;
using ibench::testing::code_of;
using ibench::testing::TempDir;

namespace {

PowerSourceConfig synthetic(SyntheticWaveform w, double interval_ms) {
  PowerSourceConfig c;
  c.interval_ms = interval_ms;
  c.source_id = "synthetic";
  c.source = w;
  return c;
}

PowerSourceConfig external(std::vector<std::string> argv,
                           ExternalCommandSource::Mode mode, double interval_ms = 20) {
  PowerSourceConfig c;
  c.interval_ms = interval_ms;
  c.source_id = "ext";
  c.source = ExternalCommandSource{std::move(argv), mode};
  return c;
}

}  // namespace

TEST_CASE("constant synthetic source") {
  auto session = start_sampling(synthetic(SyntheticWaveform::constant(100.0), 10),
                                default_clock());
  std::this_thread::sleep_for(100ms);
  const PowerTrace& tr = session->stop();
  CHECK(tr.size() >= 9);
  for (const auto& s : tr.samples()) CHECK(s.watts == 100.0);
  CHECK(tr.source_id() == "synthetic");
  // stop is idempotent and hands back the sealed trace.
  CHECK(&session->stop() == &tr);
}

TEST_CASE("immediate stop still yields an integrable trace") {
  auto session = start_sampling(synthetic(SyntheticWaveform::constant(5.0), 1000),
                                default_clock());
  const PowerTrace& tr = session->stop();
  REQUIRE(tr.size() >= 2);
  CHECK(integrate_energy(tr, {tr.front_time(), tr.back_time()}).energy_j >= 0.0);
}

TEST_CASE("sample count tracks the interval") {
  auto session = start_sampling(synthetic(SyntheticWaveform::constant(1.0), 10),
                                default_clock());
  std::this_thread::sleep_for(1s);
  const auto n = session->stop().size();
  // One sample at start, ~100 ticks, one at stop.
  CHECK(n >= 90);
  CHECK(n <= 112);
}

TEST_CASE("synthetic samples equal the waveform at their timestamps") {
  for (const auto& w : {SyntheticWaveform::ramp(10, 90, 0.1),
                        SyntheticWaveform::sinusoid(50, 20, 0.05)}) {
    auto session = start_sampling(synthetic(w, 5), default_clock());
    std::this_thread::sleep_for(150ms);
    const auto& tr = session->stop();
    const TimestampNs t0 = tr.front_time();
    for (const auto& s : tr.samples()) {
      REQUIRE(s.watts == w.evaluate(static_cast<double>(s.timestamp - t0) / 1e9));
    }
  }
}

TEST_CASE("waveform shapes") {
  const auto ramp = SyntheticWaveform::ramp(0, 100, 2);
  CHECK(ramp.evaluate(0) == 0.0);
  CHECK(ramp.evaluate(1) == doctest::Approx(50.0));
  CHECK(ramp.evaluate(5) == 100.0);
  const auto sine = SyntheticWaveform::sinusoid(10, 20, 1);
  CHECK(sine.evaluate(0.25) == doctest::Approx(30.0));
  CHECK(sine.evaluate(0.75) == 0.0);  // clamped
}

TEST_CASE("config validation") {
  CHECK(code_of([] { validate(synthetic(SyntheticWaveform::constant(1), 0)); }) ==
        ErrorCode::kInvalidArgument);
  PowerSourceConfig c;
  c.source = ReplaySource{"x.csv", "nearest"};
  CHECK(code_of([&] { validate(c); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { validate(external({}, ExternalCommandSource::Mode::kPerTick)); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("replay is rebased to session start") {
  TempDir dir;
  const std::string path = dir.file("trace.csv");
  {
    std::ofstream out(path);
    out << "timestamp_ns,power_w\n1000,10\n2001000,20\n5001000,40\n";
  }
  PowerSourceConfig c;
  c.source_id = "replayed";
  c.source = ReplaySource{path, "rebase"};
  ibench::testing::ManualClock clock;
  clock.set(7'000'000'000);
  auto session = start_sampling(c, clock);
  const auto& tr = session->stop();
  REQUIRE(tr.size() == 3);
  CHECK(tr.samples()[0] == PowerSample{7'000'000'000, 10});
  CHECK(tr.samples()[1] == PowerSample{7'002'000'000, 20});
  CHECK(tr.samples()[2] == PowerSample{7'005'000'000, 40});
  CHECK(tr.source_id() == "replayed");
}

TEST_CASE("replay of a malformed file reports the line") {
  TempDir dir;
  const std::string path = dir.file("bad.csv");
  {
    std::ofstream out(path);
    out << "timestamp_ns,power_w\n1,2\nnope\n";
  }
  PowerSourceConfig c;
  c.source = ReplaySource{path, "rebase"};
  try {
    start_sampling(c, default_clock());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("external per-tick command") {
  auto session = start_sampling(
      external({"echo", "42.5"}, ExternalCommandSource::Mode::kPerTick), default_clock());
  std::this_thread::sleep_for(100ms);
  const auto& tr = session->stop();
  CHECK(tr.size() >= 2);
  for (const auto& s : tr.samples()) CHECK(s.watts == 42.5);
}

TEST_CASE("external streaming command") {
  auto session = start_sampling(
      external({"sh", "-c", "while true; do echo 7.25; sleep 0.02; done"},
               ExternalCommandSource::Mode::kStreaming),
      default_clock());
  std::this_thread::sleep_for(200ms);
  const auto& tr = session->stop();
  CHECK(tr.size() >= 3);
  for (const auto& s : tr.samples()) CHECK(s.watts == 7.25);
}

TEST_CASE("failing sampler aborts the session") {
  TempDir dir;
  // Succeeds once, then exits non-zero on every later call.
  const std::string script =
      "if [ -e " + dir.file("seen") + " ]; then exit 3; fi; touch " + dir.file("seen") +
      "; echo 1.0";
  auto session = start_sampling(
      external({"sh", "-c", script}, ExternalCommandSource::Mode::kPerTick),
      default_clock());
  std::this_thread::sleep_for(100ms);
  CHECK(code_of([&] { session->stop(); }) == ErrorCode::kPowerSource);
  CHECK(code_of([&] { session->stop(); }) == ErrorCode::kPowerSource);
}

TEST_CASE("streaming sampler ending mid-run aborts") {
  auto session = start_sampling(
      external({"sh", "-c", "echo 3"}, ExternalCommandSource::Mode::kStreaming),
      default_clock());
  std::this_thread::sleep_for(200ms);
  CHECK(code_of([&] { session->stop(); }) == ErrorCode::kPowerSource);
}

TEST_CASE("unspawnable sampler is reported") {
  CHECK(code_of([] {
          start_sampling(external({"/nonexistent/sampler"},
                                  ExternalCommandSource::Mode::kStreaming),
                         default_clock());
        }) == ErrorCode::kSpawn);
}
