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

#include "ibench/report.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "json_codec.hpp"

namespace ibench {

using detail::ObjectReader;
using detail::ojson;

bool BenchmarkRecord::invalid() const {
  return measured_requests > 0 &&
         static_cast<double>(error_count) >
             kInvalidErrorRate * static_cast<double>(measured_requests);
}

BenchmarkRecord make_record(const RunRecord& run, const CarbonFactors& factors,
                            const RecordOptions& options) {
  if (!run.sequence_lengths.empty() &&
      run.sequence_lengths.size() != run.samples.size()) {
    throw Error(ErrorCode::kShape,
                fmt::format("{} sequence lengths for {} samples",
                            run.sequence_lengths.size(), run.samples.size()));
  }
  BenchmarkRecord r;
  r.model_name = run.handshake.model_name;
  r.platform = run.handshake.platform;
  r.precision = run.handshake.precision;
  r.item_kind = run.handshake.item_kind;
  r.device = run.handshake.device;
  r.accuracy = run.handshake.accuracy;
  r.traffic = run.traffic;
  r.warmup_iterations = run.warmup_iterations;
  r.measured_requests = run.samples.size();
  r.error_count = run.error_count();
  r.seed = options.seed;
  r.config_fingerprint = options.config_fingerprint;

  r.latency = summarize_latencies(run.samples, LatencyMode::kResponseTime,
                                  options.quantiles);
  r.service_latency = summarize_latencies(run.samples, LatencyMode::kServiceTime,
                                          options.quantiles);

  std::vector<LatencySample> ok;
  std::vector<std::int64_t> ok_seq;
  for (std::size_t i = 0; i < run.samples.size(); ++i) {
    if (run.samples[i].outcome != Outcome::kSuccess) continue;
    ok.push_back(run.samples[i]);
    if (!run.sequence_lengths.empty()) ok_seq.push_back(run.sequence_lengths[i]);
  }
  r.workload = run.sequence_lengths.empty()
                   ? summarize_workload(ok)
                   : summarize_workload(ok, std::span<const std::int64_t>(ok_seq));
  r.throughput = compute_throughput(r.service_latency, r.workload,
                                    throughput_unit_for(r.item_kind));

  r.energy = integrate_energy(run.trace, run.energy_window);
  r.carbon = compute_carbon(r.energy, factors);
  r.power_source = run.trace.source_id();
  return r;
}

// ---- Pareto ----------------------------------------------------------------

std::vector<std::string_view> known_metrics() {
  return {"latency_mean", "latency_p50",      "latency_p95",
          "latency_p99",  "throughput",       "energy_wh",
          "carbon_g",     "energy_per_item_j", "carbon_per_item_mg",
          "accuracy"};
}

namespace {

void check_metric_name(std::string_view metric) {
  const auto names = known_metrics();
  if (std::find(names.begin(), names.end(), metric) == names.end()) {
    throw Error(ErrorCode::kConfig, fmt::format("unknown metric '{}'", metric));
  }
}

}  // namespace

std::optional<double> metric_value(const BenchmarkRecord& r,
                                   std::string_view metric) {
  std::optional<double> v;
  const double items = static_cast<double>(r.workload.total_items);
  auto pct = [&](double q) -> std::optional<double> {
    auto it = r.latency.percentiles.find(q);
    if (it == r.latency.percentiles.end()) return std::nullopt;
    return it->second;
  };
  if (metric == "latency_mean") {
    v = r.latency.mean_ms;
  } else if (metric == "latency_p50") {
    v = pct(0.50);
  } else if (metric == "latency_p95") {
    v = pct(0.95);
  } else if (metric == "latency_p99") {
    v = pct(0.99);
  } else if (metric == "throughput") {
    v = r.throughput.value;
  } else if (metric == "energy_wh") {
    v = r.energy.energy_wh();
  } else if (metric == "carbon_g") {
    v = r.carbon.carbon_g;
  } else if (metric == "energy_per_item_j") {
    if (items > 0) v = r.energy.energy_j / items;
  } else if (metric == "carbon_per_item_mg") {
    if (items > 0) v = r.carbon.carbon_mg() / items;
  } else if (metric == "accuracy") {
    if (r.accuracy) v = r.accuracy->value;
  } else {
    throw Error(ErrorCode::kConfig, fmt::format("unknown metric '{}'", metric));
  }
  if (v && !std::isfinite(*v)) v.reset();
  return v;
}

Objective parse_objective(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kConfig,
                fmt::format("objective '{}' must look like metric:min or "
                            "metric:max", text));
  }
  Objective o{std::string(text.substr(0, colon)), Direction::kMinimize};
  const auto dir = text.substr(colon + 1);
  if (dir == "max") {
    o.direction = Direction::kMaximize;
  } else if (dir != "min") {
    throw Error(ErrorCode::kConfig,
                fmt::format("objective direction '{}' must be min or max", dir));
  }
  check_metric_name(o.metric);
  return o;
}

std::vector<Objective> default_objectives(
    std::span<const BenchmarkRecord> records, std::string_view pareto_latency) {
  std::vector<Objective> out{
      {fmt::format("latency_{}", pareto_latency), Direction::kMinimize},
      {"throughput", Direction::kMaximize},
      {"energy_per_item_j", Direction::kMinimize},
      {"carbon_per_item_mg", Direction::kMinimize},
  };
  check_metric_name(out.front().metric);
  const bool all_accuracy =
      !records.empty() &&
      std::all_of(records.begin(), records.end(),
                  [](const BenchmarkRecord& r) { return r.accuracy.has_value(); });
  if (all_accuracy) out.push_back({"accuracy", Direction::kMaximize});
  return out;
}

bool dominates(std::span<const double> a, std::span<const double> b,
               std::span<const Objective> objectives) {
  bool strictly = false;
  for (std::size_t k = 0; k < objectives.size(); ++k) {
    const bool max = objectives[k].direction == Direction::kMaximize;
    const double x = max ? -a[k] : a[k];
    const double y = max ? -b[k] : b[k];
    if (x > y) return false;
    strictly |= x < y;
  }
  return strictly;
}

std::vector<std::size_t> ParetoAnalysis::frontier() const {
  std::vector<std::size_t> out;
  for (const auto& p : points) {
    if (!p.dominated) out.push_back(p.record_index);
  }
  return out;
}

ParetoAnalysis pareto_frontier(std::span<const BenchmarkRecord> records,
                               std::span<const Objective> objectives) {
  if (objectives.empty()) {
    throw Error(ErrorCode::kConfig, "pareto objectives must not be empty");
  }
  for (const auto& o : objectives) check_metric_name(o.metric);

  ParetoAnalysis out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    ParetoPoint p{i, {}, false, std::nullopt};
    bool complete = true;
    for (const auto& o : objectives) {
      const auto v = metric_value(records[i], o.metric);
      if (!v) {
        out.warnings.push_back(fmt::format(
            "record {} ({} {} {}) has no '{}'; excluded from the frontier", i,
            records[i].model_name, records[i].platform,
            to_string(records[i].precision), o.metric));
        complete = false;
        break;
      }
      p.objectives.push_back(*v);
    }
    if (complete) out.points.push_back(std::move(p));
  }

  auto& pts = out.points;
  for (auto& p : pts) {
    for (const auto& q : pts) {
      if (dominates(q.objectives, p.objectives, objectives)) {
        p.dominated = true;
        break;
      }
    }
  }
  for (auto& p : pts) {
    if (!p.dominated) continue;
    for (const auto& q : pts) {
      if (!q.dominated && dominates(q.objectives, p.objectives, objectives)) {
        p.dominated_by = q.record_index;
        break;
      }
    }
  }
  return out;
}

// ---- tables ----------------------------------------------------------------

namespace {

constexpr std::string_view kBold = "\x1b[1m";
constexpr std::string_view kRed = "\x1b[31m";
constexpr std::string_view kReset = "\x1b[0m";

std::string platform_and_precision(const BenchmarkRecord& r) {
  return fmt::format("{} {}", r.platform, to_string(r.precision));
}

std::string record_label(std::span<const BenchmarkRecord> records,
                         std::size_t i) {
  const auto& r = records[i];
  return fmt::format("[{}] {} / {} ({}, B={})", i, r.model_name,
                     platform_and_precision(r), to_string(r.traffic.mode),
                     r.traffic.batch_size);
}

std::string accuracy_cell(const BenchmarkRecord& r) {
  if (!r.accuracy) return "";
  return fmt::format("{}={:.4f}", r.accuracy->metric_name, r.accuracy->value);
}

CsvCell text(std::string s) { return {std::move(s), true}; }
CsvCell num(std::string s) { return {std::move(s), false}; }
template <typename T>
CsvCell num_opt(const std::optional<T>& v) {
  return v ? num(fmt::format("{}", *v)) : num("");
}

std::string emit_text(std::span<const BenchmarkRecord> records,
                      const TableOptions& options) {
  const bool any_accuracy = std::any_of(
      records.begin(), records.end(),
      [](const BenchmarkRecord& r) { return r.accuracy.has_value(); });
  const bool any_invalid = std::any_of(
      records.begin(), records.end(),
      [](const BenchmarkRecord& r) { return r.invalid(); });

  std::vector<std::string> header{"Model",       "Platform & Precision",
                                  "Throughput",  "Latency (ms)",
                                  "Energy (Wh)", "CE (mg)"};
  if (any_accuracy) header.push_back("Accuracy");
  if (any_invalid) header.push_back("Flag");

  std::vector<std::vector<std::string>> rows;
  for (const auto& r : records) {
    std::vector<std::string> row{
        r.model_name,
        platform_and_precision(r),
        fmt::format("{:.2f}", r.throughput.value),
        fmt::format("{:.2f}", r.latency.mean_ms),
        fmt::format("{:.3f}", r.energy.energy_wh()),
        fmt::format("{:.2f}", r.carbon.carbon_mg()),
    };
    if (any_accuracy) row.push_back(accuracy_cell(r));
    if (any_invalid) row.push_back(r.invalid() ? "INVALID" : "");
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  // Text columns left-aligned, numbers right-aligned.
  auto numeric = [&](std::size_t c) { return c >= 2 && c < 6; };
  auto render = [&](const std::vector<std::string>& row, bool is_header) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      std::string cell = numeric(c) && !is_header
                             ? fmt::format("{:>{}}", row[c], width[c])
                             : fmt::format("{:<{}}", row[c], width[c]);
      if (options.color && !is_header && header[c] == "Flag" && !row[c].empty()) {
        cell = fmt::format("{}{}{}", kRed, cell, kReset);
      }
      line += cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    if (options.color && is_header) line = fmt::format("{}{}{}", kBold, line, kReset);
    return line + "\n";
  };

  std::string out = render(header, true);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& row : rows) out += render(row, false);
  if (any_invalid) {
    out += fmt::format("INVALID: more than {:.0f}% of measured requests failed\n",
                       kInvalidErrorRate * 100);
  }
  return out;
}

std::string emit_csv(std::span<const BenchmarkRecord> records) {
  std::vector<CsvRow> rows;
  CsvRow header;
  for (const char* h :
       {"Model", "Platform & Precision", "Throughput", "Latency (ms)",
        "Energy (Wh)", "CE (mg)", "Accuracy", "accuracy_metric", "platform",
        "precision", "device", "interconnect", "memory_type", "item_kind",
        "throughput_unit", "throughput_basis", "latency_mode", "latency_p50_ms",
        "latency_p95_ms", "latency_p99_ms", "latency_max_ms",
        "service_mean_ms", "traffic_mode", "batch_size", "rate_rps",
        "concurrency", "iterations", "duration_s", "sequence_length",
        "warmup_iterations", "arrival_prng", "seed", "measured_requests",
        "error_count", "invalid", "pue", "kappa_kg_per_kwh", "region_label",
        "power_source", "config_fingerprint"}) {
    header.push_back(text(h));
  }
  rows.push_back(std::move(header));

  for (const auto& r : records) {
    rows.push_back(CsvRow{
        text(r.model_name),
        text(platform_and_precision(r)),
        num(fmt::format("{:.2f}", r.throughput.value)),
        num(fmt::format("{:.2f}", r.latency.mean_ms)),
        num(fmt::format("{:.3f}", r.energy.energy_wh())),
        num(fmt::format("{:.2f}", r.carbon.carbon_mg())),
        r.accuracy ? num(fmt::format("{}", r.accuracy->value)) : num(""),
        r.accuracy ? text(r.accuracy->metric_name) : num(""),
        text(r.platform),
        text(std::string(to_string(r.precision))),
        text(r.device.device_name),
        text(std::string(to_string(r.device.interconnect))),
        text(std::string(to_string(r.device.memory_type))),
        text(std::string(to_string(r.item_kind))),
        text(std::string(to_string(r.throughput.unit))),
        text(std::string(to_string(r.throughput.basis))),
        text(std::string(to_string(r.latency.mode))),
        num(fmt::format("{}", r.latency.p50())),
        num(fmt::format("{}", r.latency.p95())),
        num(fmt::format("{}", r.latency.p99())),
        num(fmt::format("{}", r.latency.max_ms)),
        num(fmt::format("{}", r.service_latency.mean_ms)),
        text(std::string(to_string(r.traffic.mode))),
        num(fmt::format("{}", r.traffic.batch_size)),
        num(fmt::format("{}", r.traffic.rate_rps)),
        num(fmt::format("{}", r.traffic.concurrency)),
        num_opt(r.traffic.iterations),
        num_opt(r.traffic.duration_s),
        num_opt(r.traffic.sequence_length),
        num(fmt::format("{}", r.warmup_iterations)),
        text(r.arrival_prng),
        num(fmt::format("{}", r.seed)),
        num(fmt::format("{}", r.measured_requests)),
        num(fmt::format("{}", r.error_count)),
        num(r.invalid() ? "true" : "false"),
        num(fmt::format("{}", r.carbon.factors.pue)),
        num(fmt::format("{}", r.carbon.factors.kappa_kg_per_kwh)),
        text(r.carbon.factors.region_label),
        text(r.power_source),
        text(r.config_fingerprint),
    });
  }
  return write_csv(rows);
}

}  // namespace

std::string emit_table(std::span<const BenchmarkRecord> records,
                       TableFormat format, TableOptions options) {
  return format == TableFormat::kCsv ? emit_csv(records)
                                     : emit_text(records, options);
}

std::string render_frontier(std::span<const BenchmarkRecord> records,
                            const ParetoAnalysis& analysis,
                            std::span<const Objective> objectives) {
  std::string dims;
  for (const auto& o : objectives) {
    if (!dims.empty()) dims += ", ";
    dims += fmt::format("{} {}", o.metric,
                        o.direction == Direction::kMaximize ? "max" : "min");
  }
  std::string out = fmt::format("Pareto frontier ({}):\n", dims);
  for (const auto& p : analysis.points) {
    if (!p.dominated) out += fmt::format("  * {}\n", record_label(records, p.record_index));
  }
  for (const auto& p : analysis.points) {
    if (!p.dominated) continue;
    out += fmt::format("    {} dominated by {}\n",
                       record_label(records, p.record_index),
                       p.dominated_by ? record_label(records, *p.dominated_by)
                                      : std::string("?"));
  }
  for (const auto& w : analysis.warnings) out += fmt::format("  warning: {}\n", w);
  return out;
}

void sort_for_report(std::vector<BenchmarkRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const BenchmarkRecord& a, const BenchmarkRecord& b) {
                     if (a.model_name != b.model_name) return a.model_name < b.model_name;
                     if (a.precision != b.precision) return a.precision < b.precision;
                     return a.platform < b.platform;
                   });
}

// ---- CSV -------------------------------------------------------------------

std::string write_csv(std::span<const CsvRow> rows) {
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      const auto& cell = row[c];
      if (cell.quoted) {
        out += '"';
        for (char ch : cell.text) {
          if (ch == '"') out += '"';
          out += ch;
        }
        out += '"';
      } else {
        if (cell.text.find_first_of(",\"\n\r") != std::string::npos) {
          throw Error(ErrorCode::kInvalidArgument,
                      fmt::format("unquoted CSV cell '{}' needs quoting", cell.text));
        }
        out += cell.text;
      }
    }
    out += '\n';
  }
  return out;
}

std::vector<CsvRow> parse_csv(std::string_view in) {
  std::vector<CsvRow> rows;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < in.size()) {
    CsvRow row;
    const std::size_t row_line = line;
    while (true) {
      CsvCell cell;
      if (i < in.size() && in[i] == '"') {
        cell.quoted = true;
        ++i;
        while (true) {
          if (i >= in.size()) throw ParseError(row_line, "unterminated quoted cell");
          const char ch = in[i++];
          if (ch == '"') {
            if (i < in.size() && in[i] == '"') {
              cell.text += '"';
              ++i;
              continue;
            }
            break;
          }
          if (ch == '\r') throw ParseError(line, "CR line endings are not allowed");
          if (ch == '\n') ++line;
          cell.text += ch;
        }
      } else {
        while (i < in.size() && in[i] != ',' && in[i] != '\n') {
          if (in[i] == '"') throw ParseError(line, "stray quote in unquoted cell");
          if (in[i] == '\r') throw ParseError(line, "CR line endings are not allowed");
          cell.text += in[i++];
        }
      }
      row.push_back(std::move(cell));
      if (i >= in.size()) break;
      if (in[i] == ',') {
        ++i;
        continue;
      }
      if (in[i] == '\n') {
        ++i;
        ++line;
        break;
      }
      throw ParseError(line, "expected ',' or end of line after quoted cell");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---- JSON ------------------------------------------------------------------

namespace {

ojson record_to_json(const BenchmarkRecord& r) {
  ojson j;
  j["model_name"] = r.model_name;
  j["platform"] = r.platform;
  j["precision"] = to_string(r.precision);
  j["item_kind"] = to_string(r.item_kind);
  j["device"] = {{"device_name", r.device.device_name},
                 {"interconnect", to_string(r.device.interconnect)},
                 {"memory_type", to_string(r.device.memory_type)},
                 {"power_management", r.device.power_management}};
  j["accuracy"] = r.accuracy ? ojson{{"metric_name", r.accuracy->metric_name},
                                     {"value", r.accuracy->value}}
                             : ojson(nullptr);
  j["traffic"] = detail::to_json(r.traffic);
  j["arrival_prng"] = r.arrival_prng;
  j["warmup_iterations"] = r.warmup_iterations;
  j["workload"] = detail::to_json(r.workload);
  j["latency"] = detail::to_json(r.latency);
  j["service_latency"] = detail::to_json(r.service_latency);
  j["throughput"] = {{"value", r.throughput.value},
                     {"unit", to_string(r.throughput.unit)},
                     {"basis", to_string(r.throughput.basis)}};
  j["energy"] = {{"energy_j", r.energy.energy_j},
                 {"energy_wh", r.energy.energy_wh()},
                 {"window", detail::to_json(r.energy.window)},
                 {"sample_count", r.energy.sample_count}};
  j["carbon"] = {{"carbon_g", r.carbon.carbon_g},
                 {"carbon_mg", r.carbon.carbon_mg()},
                 {"factors", detail::to_json(r.carbon.factors)}};
  j["power_source"] = r.power_source;
  j["measured_requests"] = r.measured_requests;
  j["error_count"] = r.error_count;
  j["invalid"] = r.invalid();
  j["seed"] = r.seed;
  j["config_fingerprint"] = r.config_fingerprint;
  return j;
}

template <typename F>
auto enum_field(ObjectReader& r, std::string_view key, F parse) {
  const auto s = r.get<std::string>(key);
  try {
    return parse(s);
  } catch (const Error& e) {
    r.fail(key, e.what());
  }
}

BenchmarkRecord record_from_json(ObjectReader r) {
  BenchmarkRecord out;
  out.model_name = r.get<std::string>("model_name");
  out.platform = r.get<std::string>("platform");
  out.precision = enum_field(r, "precision", precision_from_string);
  out.item_kind = enum_field(r, "item_kind", item_kind_from_string);
  {
    auto d = r.object("device");
    out.device.device_name = d.get<std::string>("device_name");
    out.device.interconnect = enum_field(d, "interconnect", interconnect_from_string);
    out.device.memory_type = enum_field(d, "memory_type", memory_type_from_string);
    out.device.power_management = d.get<std::string>("power_management");
    d.finish();
  }
  if (r.has("accuracy") && !r.raw("accuracy").is_null()) {
    auto a = r.object("accuracy");
    out.accuracy = AccuracyMetadata{a.get<std::string>("metric_name"),
                                    a.get<double>("value")};
    a.finish();
  }
  out.traffic = detail::traffic_from_json(r.object("traffic"));
  out.arrival_prng = r.get<std::string>("arrival_prng");
  out.warmup_iterations = r.get<std::uint32_t>("warmup_iterations");
  out.workload = detail::workload_from_json(r.object("workload"));
  out.latency = detail::distribution_from_json(r.object("latency"));
  out.service_latency = detail::distribution_from_json(r.object("service_latency"));
  {
    auto t = r.object("throughput");
    out.throughput.value = t.get<double>("value");
    out.throughput.unit = enum_field(t, "unit", throughput_unit_from_string);
    out.throughput.basis = enum_field(t, "basis", throughput_basis_from_string);
    t.finish();
  }
  {
    auto e = r.object("energy");
    out.energy.energy_j = e.get<double>("energy_j");
    e.get<double>("energy_wh");  // derived
    out.energy.window = detail::window_from_json(e.object("window"));
    out.energy.sample_count = e.get<std::size_t>("sample_count");
    e.finish();
  }
  {
    auto c = r.object("carbon");
    out.carbon.carbon_g = c.get<double>("carbon_g");
    c.get<double>("carbon_mg");  // derived
    out.carbon.factors = detail::factors_from_json(c.object("factors"));
    out.carbon.energy = out.energy;
    c.finish();
  }
  out.power_source = r.get<std::string>("power_source");
  out.measured_requests = r.get<std::uint64_t>("measured_requests");
  out.error_count = r.get<std::uint64_t>("error_count");
  r.get<bool>("invalid");  // derived
  out.seed = r.get<std::uint64_t>("seed");
  out.config_fingerprint = r.get<std::string>("config_fingerprint");
  r.finish();
  return out;
}

}  // namespace

std::string emit_json(const ReportDocument& document) {
  ojson j;
  j["report_version"] = kReportVersion;
  ojson records = ojson::array();
  for (const auto& r : document.records) records.push_back(record_to_json(r));
  j["records"] = std::move(records);
  ojson failures = ojson::array();
  for (const auto& f : document.failures) {
    failures.push_back({{"batch_size", f.batch_size}, {"message", f.message}});
  }
  j["failures"] = std::move(failures);
  return j.dump(2) + "\n";
}

ReportDocument load_json(std::string_view text) {
  const ojson j = detail::parse_document(text);
  ObjectReader root(j, "", ErrorCode::kParse);
  const int version = root.get<int>("report_version");
  if (version != kReportVersion) {
    root.fail("report_version",
              fmt::format("unsupported version {} (expected {})", version,
                          kReportVersion));
  }
  ReportDocument doc;
  const ojson& records = root.raw("records");
  if (!records.is_array()) root.fail("records", "expected an array");
  for (std::size_t i = 0; i < records.size(); ++i) {
    doc.records.push_back(record_from_json(
        ObjectReader(records[i], fmt::format("records[{}]", i), ErrorCode::kParse)));
  }
  const ojson& failures = root.raw("failures");
  if (!failures.is_array()) root.fail("failures", "expected an array");
  for (std::size_t i = 0; i < failures.size(); ++i) {
    ObjectReader f(failures[i], fmt::format("failures[{}]", i), ErrorCode::kParse);
    doc.failures.push_back(
        {f.get<std::uint32_t>("batch_size"), f.get<std::string>("message")});
    f.finish();
  }
  root.finish();
  return doc;
}

}  // namespace ibench
