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

#include "ibench/artifacts.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_codec.hpp"

namespace ibench {

using detail::ObjectReader;
using detail::ojson;
namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot read '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", path));
}

std::string trace_file_name(std::span<const RunRecord> runs, std::size_t index) {
  if (runs.size() == 1) return "trace.csv";
  return fmt::format("trace-b{}.csv", runs[index].traffic.batch_size);
}

void store_runs(const std::string& dir, std::string_view config_bytes,
                std::span<const RunRecord> runs) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                fmt::format("cannot create '{}': {}", dir, ec.message()));
  }
  write_file((fs::path(dir) / "config.json").string(), config_bytes);

  ojson list = ojson::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunRecord& run = runs[i];
    ojson j;
    j["handshake"] = detail::to_json(run.handshake);
    j["traffic"] = detail::to_json(run.traffic);
    j["warmup_iterations"] = run.warmup_iterations;
    j["energy_window"] = detail::to_json(run.energy_window);
    if (run.trace.empty()) {
      j["trace_file"] = nullptr;
    } else {
      const std::string name = trace_file_name(runs, i);
      write_file((fs::path(dir) / name).string(), trace_to_csv(run.trace));
      j["trace_file"] = name;
    }
    j["power_source"] = run.trace.source_id();
    j["failure"] = run.failure ? ojson(*run.failure) : ojson(nullptr);
    j["sequence_lengths"] = run.sequence_lengths;
    ojson samples = ojson::array();
    for (const auto& s : run.samples) samples.push_back(detail::to_json(s));
    j["samples"] = std::move(samples);
    list.push_back(std::move(j));
  }
  ojson doc;
  doc["run_version"] = kRunFormatVersion;
  doc["runs"] = std::move(list);
  write_file((fs::path(dir) / "run.json").string(), doc.dump(1) + "\n");
}

StoredRuns load_runs(const std::string& dir) {
  StoredRuns out;
  out.config_bytes = read_file((fs::path(dir) / "config.json").string());
  const std::string run_path = (fs::path(dir) / "run.json").string();
  ojson doc;
  try {
    doc = detail::parse_document(read_file(run_path));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), fmt::format("{}: {}", run_path, e.detail()));
  }
  ObjectReader root(doc, "", ErrorCode::kParse);
  if (root.get<int>("run_version") != kRunFormatVersion) {
    root.fail("run_version", "unsupported version");
  }
  const ojson& runs = root.raw("runs");
  if (!runs.is_array()) root.fail("runs", "expected an array");
  root.finish();

  for (std::size_t i = 0; i < runs.size(); ++i) {
    ObjectReader r(runs[i], fmt::format("runs[{}]", i), ErrorCode::kParse);
    RunRecord run;
    run.handshake =
        detail::handshake_from_json(r.raw("handshake"), r.child_path("handshake"));
    run.traffic = detail::traffic_from_json(r.object("traffic"));
    run.warmup_iterations = r.get<std::uint32_t>("warmup_iterations");
    run.energy_window = detail::window_from_json(r.object("energy_window"));
    const auto source_id = r.get<std::string>("power_source");
    if (auto name = r.get_optional<std::string>("trace_file")) {
      const std::string path = (fs::path(dir) / *name).string();
      std::istringstream in(read_file(path));
      try {
        run.trace = read_trace_csv(in, source_id);
      } catch (const ParseError& e) {
        throw ParseError(e.line(), fmt::format("{}: {}", path, e.detail()));
      }
    }
    run.failure = r.get_optional<std::string>("failure");
    run.sequence_lengths = r.get<std::vector<std::int64_t>>("sequence_lengths");
    const ojson& samples = r.raw("samples");
    if (!samples.is_array()) r.fail("samples", "expected an array");
    for (std::size_t k = 0; k < samples.size(); ++k) {
      run.samples.push_back(detail::sample_from_json(ObjectReader(
          samples[k], fmt::format("{}[{}]", r.child_path("samples"), k),
          ErrorCode::kParse)));
    }
    r.finish();
    out.runs.push_back(std::move(run));
  }
  return out;
}

ReportDocument build_report(std::span<const RunRecord> runs,
                            const BenchConfig& config,
                            const std::string& config_fingerprint) {
  RecordOptions options;
  options.config_fingerprint = config_fingerprint;
  options.quantiles = config.report.quantiles;

  ReportDocument doc;
  for (const auto& run : runs) {
    if (run.failure) {
      doc.failures.push_back({run.traffic.batch_size, *run.failure});
      continue;
    }
    // The traffic seed is the effective one, including command-line
    // overrides.
    options.seed = run.traffic.seed;
    try {
      doc.records.push_back(make_record(run, config.plan.carbon, options));
    } catch (const Error& e) {
      doc.failures.push_back({run.traffic.batch_size, e.what()});
    }
  }
  return doc;
}

void write_report(const std::string& dir, const ReportDocument& document) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                fmt::format("cannot create '{}': {}", dir, ec.message()));
  }
  write_file((fs::path(dir) / "report.json").string(), emit_json(document));
  write_file((fs::path(dir) / "report.csv").string(),
             emit_table(document.records, TableFormat::kCsv));
}

}  // namespace ibench
