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

// Power sampling that runs alongside a benchmark. One session writes one
// trace; the trace may be read only after stop() seals it.

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ibench/clock.hpp"
#include "ibench/energy.hpp"

namespace ibench {

struct SyntheticWaveform {
  enum class Shape { kConstant, kRamp, kSinusoid };

  Shape shape = Shape::kConstant;
  double base_w = 0.0;       // constant level, ramp start, sinusoid mean
  double target_w = 0.0;     // ramp end level
  double ramp_s = 1.0;       // ramp duration; held at target_w afterwards
  double amplitude_w = 0.0;  // sinusoid
  double period_s = 1.0;     // sinusoid

  static SyntheticWaveform constant(double watts);
  static SyntheticWaveform ramp(double from_w, double to_w, double over_s);
  static SyntheticWaveform sinusoid(double mean_w, double amplitude_w,
                                    double period_s);

  /// Power at `seconds` after session start. Negative results clamp to 0.
  double evaluate(double seconds) const;
};

std::string_view to_string(SyntheticWaveform::Shape shape);

struct ReplaySource {
  std::string path;
  // Only re-basing to session start is supported.
  std::string alignment = "rebase";
};

struct ExternalCommandSource {
  enum class Mode {
    kPerTick,    // run the command once per tick; first stdout line = watts
    kStreaming,  // long-running; each stdout line is a reading
  };
  std::vector<std::string> argv;
  Mode mode = Mode::kPerTick;
};

struct PowerSourceConfig {
  double interval_ms = 100.0;
  std::string source_id;
  std::variant<SyntheticWaveform, ReplaySource, ExternalCommandSource> source;

  std::string_view kind() const;
};

/// Throws ErrorCode::kInvalidArgument.
void validate(const PowerSourceConfig& config);

class SamplingSession {
 public:
  virtual ~SamplingSession() = default;

  /// Seals and returns the trace. A final sample is taken at stop time for
  /// live sources. Idempotent; safe from any thread. Throws
  /// ErrorCode::kPowerSource if the source aborted mid-run.
  virtual const PowerTrace& stop() = 0;
};

/// Throws kSpawn when an external command cannot start, ParseError for a
/// malformed replay file and kInvalidArgument for an invalid config.
std::unique_ptr<SamplingSession> start_sampling(const PowerSourceConfig& config,
                                                const Clock& clock);

}  // namespace ibench
