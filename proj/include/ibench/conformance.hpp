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

#include <chrono>
#include <string>
#include <vector>

#include "ibench/clock.hpp"
#include "ibench/session.hpp"

namespace ibench {

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
  std::vector<std::string> transcript;
};

struct ConformanceReport {
  std::string transport;
  std::vector<ConformanceCheck> checks;

  bool all_passed() const;
  const ConformanceCheck* find(std::string_view name) const;
  std::string render_text(bool with_transcripts = false) const;
};

struct ConformanceOptions {
  SessionOptions session;
  std::chrono::milliseconds request_timeout{5000};
};

/// Runs handshake, sequential_infer, id_matching (concurrent requests),
/// error_response and shutdown checks against a freshly launched runner.
/// Failures are report content; this never throws for runner misbehaviour.
ConformanceReport check_conformance(const TransportConfig& transport,
                                    const Clock& clock = default_clock(),
                                    ConformanceOptions options = {});

}  // namespace ibench
