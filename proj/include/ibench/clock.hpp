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
#include <cstdint>
#include <thread>

namespace ibench {

/// Nanoseconds on the harness monotonic clock.
using TimestampNs = std::int64_t;
using DurationNs = std::int64_t;

inline constexpr double kNsPerSecond = 1e9;
inline constexpr double kNsPerMs = 1e6;

/// The single authoritative time base. Latency samples and power samples of
/// one run must come from the same Clock instance.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimestampNs now() const = 0;
};

class SteadyClock final : public Clock {
 public:
  TimestampNs now() const override {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  }
};

inline const Clock& default_clock() {
  static const SteadyClock clock;
  return clock;
}

/// Sleeps until `deadline` on a steady-clock time base.
inline void sleep_until_ns(const Clock& clock, TimestampNs deadline) {
  const TimestampNs now = clock.now();
  if (deadline > now) {
    std::this_thread::sleep_for(std::chrono::nanoseconds(deadline - now));
  }
}

}  // namespace ibench
