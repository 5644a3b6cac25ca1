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

// On-disk run directories.
//
//   config.json   the config file, byte for byte
//   run.json      raw samples, handshake, traffic and energy window per run
//   trace.csv     power trace (trace-b<B>.csv per batch size for sweeps)
//   report.json   records and failures
//   report.csv    tabular form of report.json
//
// A report is a pure function of config.json, run.json and the traces, so
// replaying a directory reproduces report.json byte for byte.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "ibench/config.hpp"
#include "ibench/loadgen.hpp"
#include "ibench/report.hpp"

namespace ibench {

inline constexpr int kRunFormatVersion = 1;

struct StoredRuns {
  std::string config_bytes;
  std::vector<RunRecord> runs;
};

/// Trace file name for run `index` of `runs`.
std::string trace_file_name(std::span<const RunRecord> runs, std::size_t index);

/// Writes config.json, run.json and trace files into `dir` (created).
void store_runs(const std::string& dir, std::string_view config_bytes,
                std::span<const RunRecord> runs);

/// Throws kIo for missing files, ParseError / kParse for malformed content.
StoredRuns load_runs(const std::string& dir);

/// One record per successful run; failed runs become RunFailure entries.
ReportDocument build_report(std::span<const RunRecord> runs,
                            const BenchConfig& config,
                            const std::string& config_fingerprint);

/// Writes report.json and report.csv into `dir`.
void write_report(const std::string& dir, const ReportDocument& document);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace ibench
