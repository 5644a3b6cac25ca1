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

#include "ibench/energy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "ibench/error.hpp"

namespace ibench {

namespace {

constexpr double kJoulesPerWh = 3600.0;
constexpr double kWhPerKwh = 1000.0;
constexpr std::string_view kTraceHeader = "timestamp_ns,power_w";

double to_joules(double value, EnergyUnit unit) {
  switch (unit) {
    case EnergyUnit::kJoule: return value;
    case EnergyUnit::kWattHour: return value * kJoulesPerWh;
    case EnergyUnit::kKilowattHour: return value * kJoulesPerWh * kWhPerKwh;
  }
  return value;
}

double from_joules(double joules, EnergyUnit unit) {
  switch (unit) {
    case EnergyUnit::kJoule: return joules;
    case EnergyUnit::kWattHour: return joules / kJoulesPerWh;
    case EnergyUnit::kKilowattHour: return joules / (kJoulesPerWh * kWhPerKwh);
  }
  return joules;
}

double interpolate(const PowerSample& a, const PowerSample& b, TimestampNs t) {
  const double frac = static_cast<double>(t - a.timestamp) /
                      static_cast<double>(b.timestamp - a.timestamp);
  return a.watts + (b.watts - a.watts) * frac;
}

double seconds_between(TimestampNs a, TimestampNs b) {
  return static_cast<double>(b - a) / kNsPerSecond;
}

}  // namespace

PowerTrace::PowerTrace(std::vector<PowerSample> samples, std::string source_id)
    : samples_(std::move(samples)), source_id_(std::move(source_id)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!std::isfinite(s.watts) || s.watts < 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("power sample {} has invalid power {} W", i,
                              s.watts));
    }
    if (i > 0 && s.timestamp <= samples_[i - 1].timestamp) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("power sample {} timestamp {} not after {}", i,
                              s.timestamp, samples_[i - 1].timestamp));
    }
  }
}

std::string_view to_string(EnergyUnit unit) {
  switch (unit) {
    case EnergyUnit::kJoule: return "J";
    case EnergyUnit::kWattHour: return "Wh";
    case EnergyUnit::kKilowattHour: return "kWh";
  }
  return "?";
}

EnergyUnit energy_unit_from_string(std::string_view text) {
  if (text == "J") return EnergyUnit::kJoule;
  if (text == "Wh") return EnergyUnit::kWattHour;
  if (text == "kWh") return EnergyUnit::kKilowattHour;
  throw Error(ErrorCode::kUnit, fmt::format("unknown energy unit '{}'", text));
}

double convert_energy_units(double value, EnergyUnit from, EnergyUnit to) {
  if (from == to) return value;
  // Direct factors for the common pairs keep e.g. 3600 J -> 1 Wh exact.
  if (from == EnergyUnit::kWattHour && to == EnergyUnit::kKilowattHour)
    return value / kWhPerKwh;
  if (from == EnergyUnit::kKilowattHour && to == EnergyUnit::kWattHour)
    return value * kWhPerKwh;
  return from_joules(to_joules(value, from), to);
}

double convert_energy_units(double value, std::string_view from,
                            std::string_view to) {
  return convert_energy_units(value, energy_unit_from_string(from),
                              energy_unit_from_string(to));
}

EnergyReading integrate_energy(const PowerTrace& trace, TimeWindow window) {
  if (window.end <= window.start) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("energy window end {} must follow start {}",
                            window.end, window.start));
  }
  const auto& s = trace.samples();
  if (s.size() < 2) {
    throw Error(ErrorCode::kInsufficientSamples,
                fmt::format("trace '{}' has {} sample(s); integration needs 2",
                            trace.source_id(), s.size()));
  }
  const TimestampNs lo = std::max(window.start, trace.front_time());
  const TimestampNs hi = std::min(window.end, trace.back_time());
  if (lo >= hi) {
    throw Error(ErrorCode::kNoOverlap,
                fmt::format("window [{}, {}] lies outside trace '{}' [{}, {}]",
                            window.start, window.end, trace.source_id(),
                            trace.front_time(), trace.back_time()));
  }

  auto by_time = [](const PowerSample& p, TimestampNs t) {
    return p.timestamp < t;
  };
  // first sample with timestamp > lo; segment [first-1, first] holds lo.
  auto first = std::upper_bound(
      s.begin(), s.end(), lo,
      [](TimestampNs t, const PowerSample& p) { return t < p.timestamp; });
  // first sample with timestamp >= hi
  auto last = std::lower_bound(s.begin(), s.end(), hi, by_time);

  double joules = 0.0;
  TimestampNs t_prev = lo;
  double p_prev = interpolate(*(first - 1), *first, lo);
  for (auto it = first; it != last; ++it) {
    joules += 0.5 * (p_prev + it->watts) * seconds_between(t_prev, it->timestamp);
    t_prev = it->timestamp;
    p_prev = it->watts;
  }
  const double p_hi = last->timestamp == hi ? last->watts
                                            : interpolate(*(last - 1), *last, hi);
  joules += 0.5 * (p_prev + p_hi) * seconds_between(t_prev, hi);

  EnergyReading reading;
  reading.energy_j = joules;
  reading.window = {lo, hi};
  reading.sample_count =
      static_cast<std::size_t>(std::distance(first - 1, last)) + 1;
  return reading;
}

void validate(const CarbonFactors& factors) {
  if (!std::isfinite(factors.pue) || factors.pue < 1.0) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("pue must be >= 1.0 (got {})", factors.pue));
  }
  if (!std::isfinite(factors.kappa_kg_per_kwh) ||
      factors.kappa_kg_per_kwh < 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("kappa must be >= 0 kg/kWh (got {})",
                            factors.kappa_kg_per_kwh));
  }
}

CarbonReading compute_carbon(const EnergyReading& energy,
                             const CarbonFactors& factors) {
  validate(factors);
  CarbonReading c;
  // kg/kWh == g/Wh
  c.carbon_g = factors.pue * factors.kappa_kg_per_kwh * energy.energy_wh();
  c.factors = factors;
  c.energy = energy;
  return c;
}

void write_trace_csv(const PowerTrace& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const auto& s : trace.samples()) {
    out << fmt::format("{},{}\n", s.timestamp, s.watts);
  }
}

std::string trace_to_csv(const PowerTrace& trace) {
  std::ostringstream out;
  write_trace_csv(trace, out);
  return out.str();
}

PowerTrace read_trace_csv(std::istream& in, std::string source_id) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') {
    throw ParseError(line_no, "CRLF line endings are not accepted");
  }
  if (line != kTraceHeader) {
    throw ParseError(line_no, fmt::format("expected header '{}'", kTraceHeader));
  }

  std::vector<PowerSample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError(line_no, "expected two comma-separated fields");
    }
    PowerSample sample;
    const char* b = line.data();
    const char* e = line.data() + line.size();
    auto [p1, ec1] = std::from_chars(b, b + comma, sample.timestamp);
    if (ec1 != std::errc() || p1 != b + comma) {
      throw ParseError(line_no, "bad timestamp_ns");
    }
    auto [p2, ec2] = std::from_chars(b + comma + 1, e, sample.watts);
    if (ec2 != std::errc() || p2 != e) {
      throw ParseError(line_no, "bad power_w");
    }
    if (!std::isfinite(sample.watts) || sample.watts < 0.0) {
      throw ParseError(line_no, "power_w must be non-negative");
    }
    if (!samples.empty() && sample.timestamp <= samples.back().timestamp) {
      throw ParseError(line_no, "timestamps must be strictly increasing");
    }
    samples.push_back(sample);
  }
  return PowerTrace(std::move(samples), std::move(source_id));
}

PowerTrace load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open '{}'", path));
  try {
    return read_trace_csv(in, path);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), fmt::format("{}: {}", path, e.detail()));
  }
}

}  // namespace ibench
