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

// Declarative run configuration (JSON). Parsing is strict: unknown keys are
// errors, and every error names its key path, e.g. "carbon.pue: must be
// >= 1.0 (got 0.9)".
//
//   {
//     "runner":  {"command": ["./runner", "--flag"]} | {"tcp": "host:port"},
//     "traffic": {"mode": "static-batch", "batch_size": 100, "iterations": 50},
//     "warmup": 10,
//     "batch_sweep": [1, 10, 100],
//     "power":   {"interval_ms": 100, "synthetic": {"shape": "constant",
//                                                    "watts": 50}},
//     "carbon":  {"pue": 1.2, "kappa_kg_per_kwh": 0.4, "region_label": "..."},
//     "output":  "out/run1",
//     "seed":    42
//   }

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ibench/loadgen.hpp"
#include "ibench/session.hpp"

namespace ibench {

struct ReportOptions {
  // Latency statistic used as the Pareto latency objective.
  std::string pareto_latency = "p95";
  std::vector<double> quantiles = default_quantiles();
};

struct BenchConfig {
  TransportConfig runner;
  SessionOptions session;
  RunPlan plan;
  std::uint64_t seed = 0;
  ReportOptions report;
};

/// Relative replay paths resolve against `base_dir`. Throws
/// ErrorCode::kConfig (key path in the message) or ParseError for invalid
/// JSON syntax.
BenchConfig parse_config(std::string_view text, const std::string& base_dir = "");

struct LoadedConfig {
  BenchConfig config;
  std::string bytes;        // file content, archived verbatim beside outputs
  std::string fingerprint;  // "sha256:<hex>" of `bytes`
};

/// Reads and parses a config file. Throws kIo when unreadable.
LoadedConfig load_config(const std::string& path);

/// "sha256:<64 hex digits>" of `bytes`.
std::string fingerprint(std::string_view bytes);

/// Applies a seed override everywhere the seed is used.
void override_seed(BenchConfig& config, std::uint64_t seed);

}  // namespace ibench
