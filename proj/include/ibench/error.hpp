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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ibench {

enum class ErrorCode {
  kEmptyInput,
  kAllSamplesFailed,
  kInvalidMeasurement,
  kShape,
  kInsufficientSamples,
  kNoOverlap,
  kUnit,
  kInvalidArgument,
  kConfig,
  kSpawn,
  kParse,
  kHandshake,
  kTimeout,
  kSessionClosed,
  kProtocol,
  kPartialRun,
  kPowerSource,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Base of every exception thrown by the library. The code lets callers
/// branch on the failure class without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when every sample of a run failed; distinct from empty input.
class AllSamplesFailedError : public Error {
 public:
  explicit AllSamplesFailedError(std::size_t failure_count);
  std::size_t failure_count() const noexcept { return failure_count_; }

 private:
  std::size_t failure_count_;
};

/// Parse failure with the 1-based line number of the offending input.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

}  // namespace ibench
