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

// Power traces, energy integration and carbon accounting.
//
// Energy is carried in joules internally and converted to watt-hours only
// when presented. Carbon is PUE * grid intensity * energy, with intensity in
// kg CO2e per kWh, which is numerically grams per Wh.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ibench/clock.hpp"

namespace ibench {

struct PowerSample {
  TimestampNs timestamp = 0;
  double watts = 0.0;

  bool operator==(const PowerSample&) const = default;
};

/// Time-ordered power samples from one source. Construction enforces
/// strictly increasing timestamps and finite, non-negative power.
class PowerTrace {
 public:
  PowerTrace() = default;
  PowerTrace(std::vector<PowerSample> samples, std::string source_id);

  const std::vector<PowerSample>& samples() const { return samples_; }
  const std::string& source_id() const { return source_id_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  TimestampNs front_time() const { return samples_.front().timestamp; }
  TimestampNs back_time() const { return samples_.back().timestamp; }

  bool operator==(const PowerTrace&) const = default;

 private:
  std::vector<PowerSample> samples_;
  std::string source_id_;
};

struct TimeWindow {
  TimestampNs start = 0;
  TimestampNs end = 0;

  DurationNs duration() const { return end - start; }
  bool operator==(const TimeWindow&) const = default;
};

enum class EnergyUnit { kJoule, kWattHour, kKilowattHour };

std::string_view to_string(EnergyUnit unit);
/// Accepts "J", "Wh", "kWh"; throws ErrorCode::kUnit otherwise.
EnergyUnit energy_unit_from_string(std::string_view text);

double convert_energy_units(double value, EnergyUnit from, EnergyUnit to);
double convert_energy_units(double value, std::string_view from,
                            std::string_view to);

struct EnergyReading {
  double energy_j = 0.0;
  // The integrated span: the requested window clamped to the trace.
  TimeWindow window;
  std::size_t sample_count = 0;

  double energy_wh() const {
    return convert_energy_units(energy_j, EnergyUnit::kJoule,
                                EnergyUnit::kWattHour);
  }

  bool operator==(const EnergyReading&) const = default;
};

/// Trapezoidal integral of the trace over `window`, with power linearly
/// interpolated at the window edges. Where the window reaches past either end
/// of the trace only the overlapping span is integrated.
///
/// Throws kInvalidArgument for an empty window, kInsufficientSamples for a
/// trace with fewer than two samples and kNoOverlap when the window lies
/// entirely outside the trace.
EnergyReading integrate_energy(const PowerTrace& trace, TimeWindow window);

struct CarbonFactors {
  double pue = 1.0;
  double kappa_kg_per_kwh = 0.0;
  std::string region_label;
  std::string timestamp_label;

  bool operator==(const CarbonFactors&) const = default;
};

/// Throws kInvalidArgument naming the violated rule (pue >= 1, kappa >= 0).
void validate(const CarbonFactors& factors);

struct CarbonReading {
  double carbon_g = 0.0;
  CarbonFactors factors;
  EnergyReading energy;

  double carbon_mg() const { return carbon_g * 1e3; }
  bool operator==(const CarbonReading&) const = default;
};

CarbonReading compute_carbon(const EnergyReading& energy,
                             const CarbonFactors& factors);

/// CSV with header `timestamp_ns,power_w`, LF line endings.
void write_trace_csv(const PowerTrace& trace, std::ostream& out);
std::string trace_to_csv(const PowerTrace& trace);

/// Throws ParseError carrying the 1-based line number of the first bad line.
PowerTrace read_trace_csv(std::istream& in, std::string source_id);
PowerTrace load_trace_csv(const std::string& path);

}  // namespace ibench
