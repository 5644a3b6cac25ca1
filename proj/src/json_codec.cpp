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

#include "json_codec.hpp"

#include <algorithm>

namespace ibench::detail {

ojson parse_document(std::string_view text) {
  try {
    return ojson::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line =
        1 + static_cast<std::size_t>(std::count(
                text.begin(), text.begin() + static_cast<long>(upto ? upto - 1 : 0),
                '\n'));
    throw ParseError(line, "invalid JSON");
  }
}

ObjectReader::ObjectReader(const ojson& j, std::string path, ErrorCode code)
    : j_(j), path_(std::move(path)), code_(code) {
  if (!j_.is_object()) {
    throw Error(code_, fmt::format("{}: expected an object",
                                   path_.empty() ? "<root>" : path_));
  }
}

std::string ObjectReader::child_path(std::string_view key) const {
  return path_.empty() ? std::string(key) : fmt::format("{}.{}", path_, key);
}

void ObjectReader::fail(std::string_view key, std::string_view what) const {
  throw Error(code_, fmt::format("{}: {}", child_path(key), what));
}

bool ObjectReader::has(std::string_view key) const {
  return j_.contains(std::string(key));
}

const ojson& ObjectReader::raw(std::string_view key) {
  auto it = j_.find(std::string(key));
  if (it == j_.end()) fail(key, "missing");
  seen_.insert(std::string(key));
  return *it;
}

ObjectReader ObjectReader::object(std::string_view key) {
  const ojson& v = raw(key);
  if (!v.is_object()) fail(key, "expected an object");
  return ObjectReader(v, child_path(key), code_);
}

void ObjectReader::finish() const {
  for (const auto& [key, value] : j_.items()) {
    if (!seen_.count(key)) fail(key, "unknown key");
  }
}

// ---- traffic ----------------------------------------------------------------

ojson to_json(const TrafficModel& t) {
  ojson j;
  j["mode"] = to_string(t.mode);
  j["batch_size"] = t.batch_size;
  j["rate_rps"] = t.rate_rps;
  j["seed"] = t.seed;
  j["concurrency"] = t.concurrency;
  j["iterations"] = t.iterations ? ojson(*t.iterations) : ojson(nullptr);
  j["duration_s"] = t.duration_s ? ojson(*t.duration_s) : ojson(nullptr);
  j["sequence_length"] =
      t.sequence_length ? ojson(*t.sequence_length) : ojson(nullptr);
  return j;
}

TrafficModel traffic_from_json(ObjectReader r) {
  TrafficModel t;
  try {
    t.mode = traffic_mode_from_string(r.get<std::string>("mode"));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInvalidArgument) throw;
    r.fail("mode", e.what());
  }
  t.batch_size = r.get<std::uint32_t>("batch_size");
  t.rate_rps = r.get<double>("rate_rps");
  t.seed = r.get<std::uint64_t>("seed");
  t.concurrency = r.get<std::uint32_t>("concurrency");
  t.iterations = r.get_optional<std::uint64_t>("iterations");
  t.duration_s = r.get_optional<double>("duration_s");
  t.sequence_length = r.get_optional<std::int64_t>("sequence_length");
  r.finish();
  return t;
}

// ---- samples ----------------------------------------------------------------

ojson to_json(const LatencySample& s) {
  ojson j;
  j["id"] = s.request_id;
  j["intended_start"] = s.intended_start;
  j["actual_start"] = s.actual_start;
  j["end"] = s.end;
  j["batch_size"] = s.batch_size;
  j["ok"] = s.outcome == Outcome::kSuccess;
  if (s.runner_start_ns) j["runner_start_ns"] = *s.runner_start_ns;
  if (s.runner_end_ns) j["runner_end_ns"] = *s.runner_end_ns;
  return j;
}

LatencySample sample_from_json(ObjectReader r) {
  LatencySample s;
  s.request_id = r.get<std::uint64_t>("id");
  s.intended_start = r.get<std::int64_t>("intended_start");
  s.actual_start = r.get<std::int64_t>("actual_start");
  s.end = r.get<std::int64_t>("end");
  s.batch_size = r.get<std::uint32_t>("batch_size");
  s.outcome = r.get<bool>("ok") ? Outcome::kSuccess : Outcome::kError;
  s.runner_start_ns = r.get_optional<std::int64_t>("runner_start_ns");
  s.runner_end_ns = r.get_optional<std::int64_t>("runner_end_ns");
  r.finish();
  return s;
}

// ---- handshake ----------------------------------------------------------------

ojson to_json(const Handshake& h) {
  ojson j = ojson::parse(encode(h));
  j.erase("type");
  return j;
}

Handshake handshake_from_json(const ojson& j, const std::string& path) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, path + ": expected an object");
  ojson msg;
  msg["type"] = "hello";
  for (const auto& [k, v] : j.items()) msg[k] = v;
  try {
    return decode_handshake(msg.dump(), 1);
  } catch (const ParseError& e) {
    throw Error(ErrorCode::kParse, fmt::format("{}: {}", path, e.detail()));
  }
}

// ---- statistics ---------------------------------------------------------------

ojson to_json(const LatencyDistribution& d) {
  ojson j;
  j["mode"] = to_string(d.mode);
  j["count"] = d.count;
  j["mean_ms"] = d.mean_ms;
  j["head_ms"] = d.head_ms;
  j["max_ms"] = d.max_ms;
  ojson pct = ojson::array();
  for (const auto& [q, v] : d.percentiles) pct.push_back({{"q", q}, {"ms", v}});
  j["percentiles"] = std::move(pct);
  return j;
}

LatencyDistribution distribution_from_json(ObjectReader r) {
  LatencyDistribution d;
  try {
    d.mode = latency_mode_from_string(r.get<std::string>("mode"));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInvalidArgument) throw;
    r.fail("mode", e.what());
  }
  d.count = r.get<std::size_t>("count");
  d.mean_ms = r.get<double>("mean_ms");
  d.head_ms = r.get<double>("head_ms");
  d.max_ms = r.get<double>("max_ms");
  const ojson& pct = r.raw("percentiles");
  if (!pct.is_array()) r.fail("percentiles", "expected an array");
  for (std::size_t i = 0; i < pct.size(); ++i) {
    ObjectReader p(pct[i], fmt::format("{}[{}]", r.child_path("percentiles"), i),
                   ErrorCode::kParse);
    const double q = p.get<double>("q");
    d.percentiles[q] = p.get<double>("ms");
    p.finish();
  }
  r.finish();
  return d;
}

ojson to_json(const StatsTriple& s) {
  return ojson{{"min", s.min}, {"mean", s.mean}, {"max", s.max}};
}

StatsTriple stats_from_json(ObjectReader r) {
  StatsTriple s{r.get<double>("min"), r.get<double>("mean"), r.get<double>("max")};
  r.finish();
  return s;
}

ojson to_json(const WorkloadDescriptor& w) {
  ojson j;
  j["batch_size_stats"] = to_json(w.batch_size_stats);
  j["sequence_length_stats"] =
      w.sequence_length_stats ? to_json(*w.sequence_length_stats) : ojson(nullptr);
  j["total_requests"] = w.total_requests;
  j["total_items"] = w.total_items;
  return j;
}

WorkloadDescriptor workload_from_json(ObjectReader r) {
  WorkloadDescriptor w;
  w.batch_size_stats = stats_from_json(r.object("batch_size_stats"));
  if (r.has("sequence_length_stats") && !r.raw("sequence_length_stats").is_null()) {
    w.sequence_length_stats = stats_from_json(r.object("sequence_length_stats"));
  }
  w.total_requests = r.get<std::uint64_t>("total_requests");
  w.total_items = r.get<std::uint64_t>("total_items");
  r.finish();
  return w;
}

// ---- energy and carbon -------------------------------------------------------

ojson to_json(const CarbonFactors& f) {
  ojson j;
  j["pue"] = f.pue;
  j["kappa_kg_per_kwh"] = f.kappa_kg_per_kwh;
  j["region_label"] = f.region_label;
  j["timestamp_label"] = f.timestamp_label;
  return j;
}

CarbonFactors factors_from_json(ObjectReader r) {
  CarbonFactors f;
  f.pue = r.get<double>("pue");
  f.kappa_kg_per_kwh = r.get<double>("kappa_kg_per_kwh");
  f.region_label = r.get_or<std::string>("region_label", "");
  f.timestamp_label = r.get_or<std::string>("timestamp_label", "");
  r.finish();
  return f;
}

ojson to_json(const TimeWindow& w) {
  return ojson{{"start_ns", w.start}, {"end_ns", w.end}};
}

TimeWindow window_from_json(ObjectReader r) {
  TimeWindow w{r.get<std::int64_t>("start_ns"), r.get<std::int64_t>("end_ns")};
  r.finish();
  return w;
}

}  // namespace ibench::detail
