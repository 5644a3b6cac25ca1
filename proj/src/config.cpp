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

#include "ibench/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_codec.hpp"

namespace ibench {

using detail::ObjectReader;
using detail::ojson;

namespace {

void require(bool ok, ObjectReader& r, std::string_view key,
             std::string_view rule) {
  if (!ok) r.fail(key, rule);
}

double positive(ObjectReader& r, std::string_view key) {
  const double v = r.get<double>(key);
  require(std::isfinite(v) && v > 0.0, r, key,
          fmt::format("must be > 0 (got {})", v));
  return v;
}

double non_negative(ObjectReader& r, std::string_view key) {
  const double v = r.get<double>(key);
  require(std::isfinite(v) && v >= 0.0, r, key,
          fmt::format("must be >= 0 (got {})", v));
  return v;
}

std::vector<std::string> command_field(ObjectReader& r, std::string_view key) {
  const ojson& v = r.raw(key);
  std::vector<std::string> argv;
  if (v.is_string()) {
    argv = split_command(v.get<std::string>());
  } else if (v.is_array() &&
             std::all_of(v.begin(), v.end(),
                         [](const ojson& e) { return e.is_string(); })) {
    for (const auto& e : v) argv.push_back(e.get<std::string>());
  } else {
    r.fail(key, "expected a string or an array of strings");
  }
  require(!argv.empty(), r, key, "must not be empty");
  return argv;
}

TransportConfig parse_runner(ObjectReader r, SessionOptions& session) {
  const bool has_cmd = r.has("command");
  const bool has_tcp = r.has("tcp");
  if (has_cmd == has_tcp) {
    r.fail("command", "exactly one of 'command' or 'tcp' must be given");
  }
  TransportConfig out;
  if (has_cmd) {
    out = CommandTransport{command_field(r, "command")};
  } else {
    try {
      out = parse_tcp_endpoint(r.get<std::string>("tcp"));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInvalidArgument) throw;
      r.fail("tcp", e.what());
    }
  }
  if (auto ms = r.get_optional<std::int64_t>("connect_timeout_ms")) {
    require(*ms > 0, r, "connect_timeout_ms", "must be > 0");
    session.connect_timeout = std::chrono::milliseconds(*ms);
  }
  r.finish();
  return out;
}

TrafficModel parse_traffic(ObjectReader r) {
  TrafficModel t;
  const auto mode = r.get<std::string>("mode");
  try {
    t.mode = traffic_mode_from_string(mode);
  } catch (const Error&) {
    r.fail("mode", fmt::format("unknown mode '{}' (open-loop-poisson, "
                               "closed-loop, static-batch)", mode));
  }
  t.batch_size = r.get_or<std::uint32_t>("batch_size", 1);
  require(t.batch_size >= 1, r, "batch_size", "must be >= 1");
  if (auto it = r.get_optional<std::uint64_t>("iterations")) {
    require(*it >= 1, r, "iterations", "must be >= 1");
    t.iterations = it;
  }
  if (r.has("duration_s")) t.duration_s = positive(r, "duration_s");
  if (auto seq = r.get_optional<std::int64_t>("sequence_length")) {
    require(*seq >= 1, r, "sequence_length", "must be >= 1");
    t.sequence_length = seq;
  }

  using Mode = TrafficModel::Mode;
  if (t.mode == Mode::kOpenLoopPoisson) {
    t.rate_rps = positive(r, "rate_rps");
    require(t.duration_s.has_value(), r, "duration_s",
            "required for open-loop-poisson");
  } else if (r.has("rate_rps")) {
    r.fail("rate_rps", "only valid for open-loop-poisson");
  }
  if (t.mode == Mode::kClosedLoop) {
    t.concurrency = r.get_or<std::uint32_t>("concurrency", 1);
    require(t.concurrency >= 1, r, "concurrency", "must be >= 1");
    require(t.iterations || t.duration_s, r, "iterations",
            "closed-loop needs iterations or duration_s");
  } else if (r.has("concurrency")) {
    r.fail("concurrency", "only valid for closed-loop");
  }
  if (t.mode == Mode::kStaticBatch) {
    require(t.iterations.has_value(), r, "iterations",
            "required for static-batch");
  }
  r.finish();
  return t;
}

SyntheticWaveform parse_waveform(ObjectReader r) {
  const auto shape = r.get<std::string>("shape");
  SyntheticWaveform w;
  if (shape == "constant") {
    w = SyntheticWaveform::constant(non_negative(r, "watts"));
  } else if (shape == "ramp") {
    const double from = non_negative(r, "from_w");
    const double to = non_negative(r, "to_w");
    w = SyntheticWaveform::ramp(from, to, positive(r, "over_s"));
  } else if (shape == "sinusoid") {
    const double mean = non_negative(r, "mean_w");
    const double amp = non_negative(r, "amplitude_w");
    w = SyntheticWaveform::sinusoid(mean, amp, positive(r, "period_s"));
  } else {
    r.fail("shape", fmt::format("unknown shape '{}' (constant, ramp, sinusoid)",
                                shape));
  }
  r.finish();
  return w;
}

PowerSourceConfig parse_power(ObjectReader r, const std::string& base_dir) {
  PowerSourceConfig p;
  if (r.has("interval_ms")) p.interval_ms = positive(r, "interval_ms");
  p.source_id = r.get_or<std::string>("source_id", "");
  const int kinds = static_cast<int>(r.has("synthetic")) +
                    static_cast<int>(r.has("replay")) +
                    static_cast<int>(r.has("external_command"));
  require(kinds == 1, r, "synthetic",
          "exactly one of 'synthetic', 'replay' or 'external_command' must be "
          "given");
  if (r.has("synthetic")) {
    p.source = parse_waveform(r.object("synthetic"));
  } else if (r.has("replay")) {
    auto s = r.object("replay");
    ReplaySource src;
    src.path = s.get<std::string>("path");
    require(!src.path.empty(), s, "path", "must not be empty");
    if (!base_dir.empty() && std::filesystem::path(src.path).is_relative()) {
      src.path = (std::filesystem::path(base_dir) / src.path).string();
    }
    src.alignment = s.get_or<std::string>("alignment", "rebase");
    require(src.alignment == "rebase", s, "alignment",
            fmt::format("unsupported alignment '{}' (only 'rebase')",
                        src.alignment));
    s.finish();
    p.source = std::move(src);
  } else {
    auto s = r.object("external_command");
    ExternalCommandSource src;
    src.argv = command_field(s, "command");
    const auto mode = s.get_or<std::string>("mode", "per-tick");
    if (mode == "streaming") {
      src.mode = ExternalCommandSource::Mode::kStreaming;
    } else {
      require(mode == "per-tick", s, "mode",
              fmt::format("unknown mode '{}' (per-tick, streaming)", mode));
    }
    s.finish();
    p.source = std::move(src);
  }
  r.finish();
  return p;
}

CarbonFactors parse_carbon(ObjectReader r) {
  CarbonFactors f;
  f.pue = r.get<double>("pue");
  require(std::isfinite(f.pue) && f.pue >= 1.0, r, "pue",
          fmt::format("must be >= 1.0 (got {})", f.pue));
  f.kappa_kg_per_kwh = r.get<double>("kappa_kg_per_kwh");
  require(std::isfinite(f.kappa_kg_per_kwh) && f.kappa_kg_per_kwh >= 0.0, r,
          "kappa_kg_per_kwh",
          fmt::format("must be >= 0 (got {})", f.kappa_kg_per_kwh));
  f.region_label = r.get_or<std::string>("region_label", "");
  f.timestamp_label = r.get_or<std::string>("timestamp_label", "");
  r.finish();
  return f;
}

ReportOptions parse_report(ObjectReader r) {
  ReportOptions o;
  o.pareto_latency = r.get_or<std::string>("pareto_latency", "p95");
  require(o.pareto_latency == "mean" || o.pareto_latency == "p50" ||
              o.pareto_latency == "p95" || o.pareto_latency == "p99",
          r, "pareto_latency", "must be one of mean, p50, p95, p99");
  if (r.has("quantiles")) {
    const ojson& q = r.raw("quantiles");
    require(q.is_array(), r, "quantiles", "expected an array of numbers");
    o.quantiles.clear();
    for (const auto& v : q) {
      require(v.is_number(), r, "quantiles", "expected an array of numbers");
      const double x = v.get<double>();
      require(x > 0.0 && x <= 1.0, r, "quantiles",
              fmt::format("{} is outside (0, 1]", x));
      o.quantiles.push_back(x);
    }
  }
  r.finish();
  return o;
}

}  // namespace

BenchConfig parse_config(std::string_view text, const std::string& base_dir) {
  const ojson j = detail::parse_document(text);
  ObjectReader root(j, "", ErrorCode::kConfig);
  BenchConfig c;
  c.runner = parse_runner(root.object("runner"), c.session);
  c.plan.traffic = parse_traffic(root.object("traffic"));
  c.plan.power = parse_power(root.object("power"), base_dir);
  c.plan.carbon = parse_carbon(root.object("carbon"));
  c.plan.warmup_iterations = root.get_or<std::uint32_t>("warmup", 10);
  if (root.has("batch_sweep")) {
    const ojson& sweep = root.raw("batch_sweep");
    if (!sweep.is_array() || sweep.empty()) {
      root.fail("batch_sweep", "expected a non-empty array of batch sizes");
    }
    for (const auto& v : sweep) {
      if (!v.is_number_unsigned() || v.get<std::uint64_t>() < 1 ||
          v.get<std::uint64_t>() > UINT32_MAX) {
        root.fail("batch_sweep", "entries must be integers >= 1");
      }
      const auto b = v.get<std::uint32_t>();
      if (!c.plan.batch_sweep.empty() && b <= c.plan.batch_sweep.back()) {
        root.fail("batch_sweep", "entries must be strictly increasing");
      }
      c.plan.batch_sweep.push_back(b);
    }
  }
  c.plan.output_path = root.get_or<std::string>("output", "ibench-out");
  c.seed = root.get_or<std::uint64_t>("seed", 0);
  c.plan.traffic.seed = c.seed;
  if (auto ms = root.get_optional<std::int64_t>("request_timeout_ms")) {
    if (*ms <= 0) root.fail("request_timeout_ms", "must be > 0");
    c.plan.request_timeout = std::chrono::milliseconds(*ms);
  }
  if (auto n = root.get_optional<std::uint64_t>("max_in_flight")) {
    if (*n < 1) root.fail("max_in_flight", "must be >= 1");
    c.plan.max_in_flight = *n;
  }
  if (root.has("report")) c.report = parse_report(root.object("report"));
  root.finish();

  try {
    validate(c.plan);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, fmt::format("config: {}", e.what()));
  }
  return c;
}

std::string fingerprint(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kIo, "sha256 digest failed");
  }
  std::string out = "sha256:";
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot read config '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  LoadedConfig out;
  out.bytes = buf.str();
  out.fingerprint = fingerprint(out.bytes);
  const auto dir = std::filesystem::path(path).parent_path().string();
  try {
    out.config = parse_config(out.bytes, dir);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), fmt::format("{}: {}", path, e.detail()));
  }
  return out;
}

void override_seed(BenchConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.plan.traffic.seed = seed;
}

}  // namespace ibench
