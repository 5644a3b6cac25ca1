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

// Internal JSON plumbing shared by reports, stored runs and configs.

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>

#include <fmt/format.h>
#include <json.hpp>

#include "ibench/error.hpp"
#include "ibench/loadgen.hpp"
#include "ibench/metrics.hpp"
#include "ibench/protocol.hpp"

namespace ibench::detail {

using ojson = nlohmann::ordered_json;

/// Parses a whole document. Throws ParseError with the line of the first
/// syntax error.
ojson parse_document(std::string_view text);

/// Strict view of one JSON object: typed field access with key paths in
/// every error, and rejection of keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const ojson& j, std::string path, ErrorCode code);

  const std::string& path() const { return path_; }
  [[noreturn]] void fail(std::string_view key, std::string_view what) const;

  bool has(std::string_view key) const;
  const ojson& raw(std::string_view key);

  template <typename T>
  T get(std::string_view key) {
    const ojson& v = raw(key);
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      // get<T>() would silently wrap negatives and truncate fractions.
      const bool integral = std::is_unsigned_v<T> ? v.is_number_unsigned()
                                                  : v.is_number_integer();
      if (!integral) fail(key, fmt::format("expected {}", type_name<T>()));
      if constexpr (std::is_unsigned_v<T>) {
        if (v.template get<std::uint64_t>() > std::numeric_limits<T>::max()) {
          fail(key, "is out of range");
        }
      }
    }
    try {
      return v.get<T>();
    } catch (const nlohmann::json::exception&) {
      fail(key, fmt::format("expected {}", type_name<T>()));
    }
  }

  template <typename T>
  std::optional<T> get_optional(std::string_view key) {
    if (!has(key) || j_.at(std::string(key)).is_null()) {
      if (has(key)) seen_.insert(std::string(key));
      return std::nullopt;
    }
    return get<T>(key);
  }

  template <typename T>
  T get_or(std::string_view key, T fallback) {
    auto v = get_optional<T>(key);
    return v ? *v : fallback;
  }

  ObjectReader object(std::string_view key);
  std::string child_path(std::string_view key) const;

  /// Throws for any key not read so far.
  void finish() const;

 private:
  template <typename T>
  static std::string_view type_name() {
    if constexpr (std::is_same_v<T, bool>) {
      return "a boolean";
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      return "a non-negative integer";
    } else if constexpr (std::is_integral_v<T>) {
      return "an integer";
    } else if constexpr (std::is_floating_point_v<T>) {
      return "a number";
    } else if constexpr (std::is_same_v<T, std::string>) {
      return "a string";
    } else {
      return "a value of another type";
    }
  }

  const ojson& j_;
  std::string path_;
  ErrorCode code_;
  std::set<std::string, std::less<>> seen_;
};

ojson to_json(const TrafficModel& t);
TrafficModel traffic_from_json(ObjectReader r);

ojson to_json(const LatencySample& s);
LatencySample sample_from_json(ObjectReader r);

ojson to_json(const Handshake& h);
Handshake handshake_from_json(const ojson& j, const std::string& path);

ojson to_json(const LatencyDistribution& d);
LatencyDistribution distribution_from_json(ObjectReader r);

ojson to_json(const StatsTriple& s);
StatsTriple stats_from_json(ObjectReader r);

ojson to_json(const WorkloadDescriptor& w);
WorkloadDescriptor workload_from_json(ObjectReader r);

ojson to_json(const CarbonFactors& f);
CarbonFactors factors_from_json(ObjectReader r);

ojson to_json(const TimeWindow& w);
TimeWindow window_from_json(ObjectReader r);

}  // namespace ibench::detail
