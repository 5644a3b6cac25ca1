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

#include "ibench/error.hpp"

#include <fmt/format.h>

namespace ibench {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kAllSamplesFailed: return "all-samples-failed";
    case ErrorCode::kInvalidMeasurement: return "invalid-measurement";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kInsufficientSamples: return "insufficient-samples";
    case ErrorCode::kNoOverlap: return "no-overlap";
    case ErrorCode::kUnit: return "unit";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kSpawn: return "spawn";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kHandshake: return "handshake";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kSessionClosed: return "session-closed";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kPartialRun: return "partial-run";
    case ErrorCode::kPowerSource: return "power-source";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

AllSamplesFailedError::AllSamplesFailedError(std::size_t failure_count)
    : Error(ErrorCode::kAllSamplesFailed,
            fmt::format("all {} samples failed; no latency to summarize",
                        failure_count)),
      failure_count_(failure_count) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCode::kParse, fmt::format("line {}: {}", line, message)),
      line_(line),
      detail_(message) {}

}  // namespace ibench
