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

#include <fstream>

#include <doctest.h>

#include "ibench/config.hpp"
#include "test_util.hpp"

using namespace ibench;
using ibench::testing::code_of;
using ibench::testing::TempDir;

namespace {

const char* kValid = R"({
  "runner": {"command": ["./runner", "--delay-ms", "10"], "connect_timeout_ms": 3000},
  "traffic": {"mode": "static-batch", "batch_size": 100, "iterations": 50},
  "warmup": 5,
  "power": {"interval_ms": 20, "source_id": "gen",
            "synthetic": {"shape": "constant", "watts": 50}},
  "carbon": {"pue": 1.2, "kappa_kg_per_kwh": 0.4, "region_label": "EU",
             "timestamp_label": "2026-01"},
  "output": "out/run1",
  "seed": 42,
  "request_timeout_ms": 2500,
  "max_in_flight": 8,
  "report": {"pareto_latency": "p99", "quantiles": [0.5, 0.9]}
})";

// Message of the config error raised by `text`, or "" if it parses.
std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
    return e.what();
  }
  return "";
}

std::string with(std::string base, const std::string& from, const std::string& to) {
  const auto at = base.find(from);
  REQUIRE(at != std::string::npos);
  return base.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("a complete config parses") {
  const auto c = parse_config(kValid);
  const auto& cmd = std::get<CommandTransport>(c.runner);
  CHECK(cmd.argv == std::vector<std::string>{"./runner", "--delay-ms", "10"});
  CHECK(c.session.connect_timeout == std::chrono::milliseconds(3000));
  auto expected = TrafficModel::static_batch(100, 50);
  expected.seed = 42;
  CHECK(c.plan.traffic == expected);
  CHECK(c.plan.warmup_iterations == 5);
  CHECK(c.plan.power.interval_ms == 20);
  CHECK(c.plan.power.source_id == "gen");
  CHECK(std::get<SyntheticWaveform>(c.plan.power.source).base_w == 50);
  CHECK(c.plan.carbon == CarbonFactors{1.2, 0.4, "EU", "2026-01"});
  CHECK(c.plan.output_path == "out/run1");
  CHECK(c.plan.request_timeout == std::chrono::milliseconds(2500));
  CHECK(c.plan.max_in_flight == 8);
  CHECK(c.seed == 42);
  CHECK(c.report.pareto_latency == "p99");
}

TEST_CASE("defaults") {
  const auto c = parse_config(R"({
    "runner": {"tcp": "127.0.0.1:9000"},
    "traffic": {"mode": "open-loop-poisson", "rate_rps": 100, "duration_s": 2},
    "power": {"synthetic": {"shape": "constant", "watts": 1}},
    "carbon": {"pue": 1.0, "kappa_kg_per_kwh": 0.0}
  })");
  const auto& tcp = std::get<TcpTransport>(c.runner);
  CHECK(tcp.port == 9000);
  CHECK(c.plan.warmup_iterations == 10);
  CHECK(c.plan.output_path == "ibench-out");
  CHECK(c.seed == 0);
  CHECK(c.plan.traffic.seed == 0);
  CHECK(c.plan.traffic.mode == TrafficModel::Mode::kOpenLoopPoisson);
  CHECK(c.report.pareto_latency == "p95");
}

TEST_CASE("errors name the key path") {
  CHECK(error_of(with(kValid, "\"pue\": 1.2", "\"pue\": 0.9")) ==
        "carbon.pue: must be >= 1.0 (got 0.9)");
  CHECK(error_of(with(kValid, "\"warmup\": 5", "\"warmup\": 5, \"colour\": 1"))
            .find("colour") != std::string::npos);
  CHECK(error_of(with(kValid, "\"watts\": 50", "\"watts\": 50, \"extra\": 2"))
            .find("power.synthetic.extra") != std::string::npos);
  CHECK(error_of(with(kValid, "\"batch_size\": 100", "\"batch_size\": -1"))
            .find("traffic.batch_size") != std::string::npos);
  CHECK(error_of(with(kValid, "\"batch_size\": 100", "\"batch_size\": \"big\""))
            .find("traffic.batch_size") != std::string::npos);
  CHECK(error_of(with(kValid, "\"static-batch\"", "\"bursty\"")).find("traffic.mode") !=
        std::string::npos);
  CHECK(error_of(with(kValid, "\"kappa_kg_per_kwh\": 0.4", "\"kappa_kg_per_kwh\": -1"))
            .find("carbon.kappa_kg_per_kwh") != std::string::npos);
  CHECK(error_of(with(kValid, "\"p99\"", "\"p42\"")).find("report.pareto_latency") !=
        std::string::npos);
  CHECK(error_of(with(kValid, "\"warmup\": 5", "\"batch_sweep\": [10, 1]"))
            .find("batch_sweep") != std::string::npos);
  CHECK(error_of(with(kValid, "\"iterations\": 50", "\"iterations\": 50, \"rate_rps\": 5"))
            .find("traffic.rate_rps") != std::string::npos);
  CHECK(error_of(R"({"traffic": {}})").find("runner") != std::string::npos);
}

TEST_CASE("power source must be exactly one kind") {
  const auto both = with(kValid, "\"synthetic\":",
                         "\"replay\": {\"path\": \"t.csv\"}, \"synthetic\":");
  CHECK(error_of(both).find("power") != std::string::npos);
  const auto none = with(kValid, R"("synthetic": {"shape": "constant", "watts": 50})",
                         R"("x": 1)");
  CHECK(error_of(none).find("power") != std::string::npos);
}

TEST_CASE("replay paths resolve against the config directory") {
  const auto text = with(kValid, R"("synthetic": {"shape": "constant", "watts": 50})",
                         R"("replay": {"path": "traces/p.csv"})");
  const auto c = parse_config(text, "/data/cfg");
  CHECK(std::get<ReplaySource>(c.plan.power.source).path == "/data/cfg/traces/p.csv");
  const auto abs = with(kValid, R"("synthetic": {"shape": "constant", "watts": 50})",
                        R"("replay": {"path": "/abs/p.csv"})");
  CHECK(std::get<ReplaySource>(parse_config(abs, "/data/cfg").plan.power.source).path ==
        "/abs/p.csv");
}

TEST_CASE("external command power source") {
  const auto text = with(kValid, R"("synthetic": {"shape": "constant", "watts": 50})",
                         R"("external_command": {"command": "read-power --gpu 0", "mode": "streaming"})");
  const auto c = parse_config(text);
  const auto& src = std::get<ExternalCommandSource>(c.plan.power.source);
  CHECK(src.mode == ExternalCommandSource::Mode::kStreaming);
  CHECK(src.argv == std::vector<std::string>{"read-power", "--gpu", "0"});
}

TEST_CASE("syntax errors carry a line number") {
  try {
    parse_config("{\n  \"runner\": {\n  }\n  ,,\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("fingerprint is sha256 of the raw bytes") {
  CHECK(fingerprint("abc") ==
        "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(fingerprint("") ==
        "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("load_config keeps the exact bytes") {
  TempDir dir;
  const std::string path = dir.file("bench.json");
  const std::string text = std::string(kValid) + "\n\n";
  std::ofstream(path) << text;
  const auto loaded = load_config(path);
  CHECK(loaded.bytes == text);
  CHECK(loaded.fingerprint == fingerprint(text));
  CHECK(loaded.config.seed == 42);
  CHECK(code_of([&] { load_config(dir.file("missing.json")); }) == ErrorCode::kIo);
}

TEST_CASE("seed override reaches the traffic model") {
  auto c = parse_config(R"({
    "runner": {"tcp": "h:1"},
    "traffic": {"mode": "open-loop-poisson", "rate_rps": 10, "duration_s": 1},
    "power": {"synthetic": {"shape": "constant", "watts": 1}},
    "carbon": {"pue": 1.0, "kappa_kg_per_kwh": 0.1},
    "seed": 3
  })");
  CHECK(c.plan.traffic.seed == 3);
  override_seed(c, 77);
  CHECK(c.seed == 77);
  CHECK(c.plan.traffic.seed == 77);
}
