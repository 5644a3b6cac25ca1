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

#include "ibench/cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ibench/artifacts.hpp"
#include "ibench/config.hpp"
#include "ibench/conformance.hpp"
#include "ibench/loadgen.hpp"
#include "ibench/report.hpp"
#include "ibench/session.hpp"

namespace ibench {

namespace {

constexpr std::size_t kTranscriptTail = 20;

struct CommonFlags {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

bool use_color(const std::ostream& out) {
  return &out == &std::cout && ::isatty(STDOUT_FILENO) &&
         std::getenv("BENCH_NO_COLOR") == nullptr;
}

int exit_code_for(const ReportDocument& doc) {
  if (!doc.failures.empty()) return kExitFailure;
  const bool invalid = std::any_of(doc.records.begin(), doc.records.end(),
                                   [](const BenchmarkRecord& r) { return r.invalid(); });
  return invalid ? kExitInvalidRun : kExitOk;
}

void print_transcript(const RunnerSession& session, std::ostream& err) {
  const auto lines = session.transcript();
  const std::size_t from = lines.size() > kTranscriptTail ? lines.size() - kTranscriptTail : 0;
  if (from < lines.size()) err << "runner transcript (most recent last):\n";
  for (std::size_t i = from; i < lines.size(); ++i) err << "  " << lines[i] << "\n";
  for (const auto& v : session.violations()) err << "  protocol violation: " << v << "\n";
}

void print_report(const ReportDocument& doc, const ReportOptions& options,
                  std::ostream& out) {
  if (!doc.records.empty()) {
    out << emit_table(doc.records, TableFormat::kText, {use_color(out)});
  }
  for (const auto& f : doc.failures) {
    out << fmt::format("FAILED batch_size={}: {}\n", f.batch_size, f.message);
  }
  if (doc.records.size() > 1) {
    const auto objectives = default_objectives(doc.records, options.pareto_latency);
    const auto analysis = pareto_frontier(doc.records, objectives);
    out << "\n" << render_frontier(doc.records, analysis, objectives);
  }
}

/// Shared body of run and sweep.
int cmd_measure(const CommonFlags& flags, bool sweep, std::ostream& out,
                std::ostream& err) {
  LoadedConfig loaded = load_config(flags.config);
  BenchConfig& config = loaded.config;
  if (flags.seed) override_seed(config, *flags.seed);
  if (!flags.output.empty()) config.plan.output_path = flags.output;
  if (sweep && config.plan.batch_sweep.empty()) {
    throw Error(ErrorCode::kConfig, "batch_sweep: required for 'sweep'");
  }
  if (!sweep && !config.plan.batch_sweep.empty()) {
    throw Error(ErrorCode::kConfig,
                "batch_sweep: set in config; use 'ibench sweep' to run it");
  }

  auto session = RunnerSession::open(config.runner, default_clock(), config.session);
  if (!flags.quiet) {
    const auto& h = session->handshake();
    err << fmt::format("runner: {} on {} ({}, {}) via {}\n", h.model_name,
                       h.platform, to_string(h.precision), h.device.device_name,
                       describe(config.runner));
  }

  std::vector<RunRecord> runs;
  if (sweep) {
    runs = run_batch_sweep(config.plan, *session);
  } else {
    try {
      runs.push_back(execute_run(config.plan, *session));
    } catch (const PartialRunError& e) {
      RunRecord partial = e.partial();
      partial.failure = e.what();
      runs.push_back(std::move(partial));
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      print_transcript(*session, err);
      return kExitFailure;
    }
  }
  const bool broken = std::any_of(runs.begin(), runs.end(),
                                  [](const RunRecord& r) { return r.failure.has_value(); });
  if (broken) print_transcript(*session, err);
  session->close();

  store_runs(config.plan.output_path, loaded.bytes, runs);
  const ReportDocument doc = build_report(runs, config, loaded.fingerprint);
  write_report(config.plan.output_path, doc);
  if (!flags.quiet) {
    print_report(doc, config.report, out);
    out << fmt::format("artifacts: {}\n", config.plan.output_path);
  }
  return exit_code_for(doc);
}

int cmd_replay(const std::string& run_dir, const CommonFlags& flags,
               std::ostream& out) {
  const StoredRuns stored = load_runs(run_dir);
  const BenchConfig config = parse_config(stored.config_bytes);
  const ReportDocument doc =
      build_report(stored.runs, config, fingerprint(stored.config_bytes));
  const std::string dest = flags.output.empty()
                               ? (std::filesystem::path(run_dir) / "replay").string()
                               : flags.output;
  write_report(dest, doc);
  if (!flags.quiet) {
    print_report(doc, config.report, out);
    out << fmt::format("artifacts: {}\n", dest);
  }
  return exit_code_for(doc);
}

int cmd_conformance(const CommonFlags& flags, const std::string& runner_cmd,
                    const std::string& tcp, bool transcripts, std::ostream& out) {
  const int given = static_cast<int>(!flags.config.empty()) +
                    static_cast<int>(!runner_cmd.empty()) +
                    static_cast<int>(!tcp.empty());
  if (given != 1) {
    throw Error(ErrorCode::kConfig,
                "conformance needs exactly one of --config, --runner or --tcp");
  }
  TransportConfig transport;
  ConformanceOptions options;
  if (!flags.config.empty()) {
    const LoadedConfig loaded = load_config(flags.config);
    transport = loaded.config.runner;
    options.session = loaded.config.session;
  } else if (!runner_cmd.empty()) {
    transport = CommandTransport{split_command(runner_cmd)};
  } else {
    transport = parse_tcp_endpoint(tcp);
  }
  const ConformanceReport report = check_conformance(transport, default_clock(), options);
  if (!flags.quiet || !report.all_passed()) out << report.render_text(transcripts);
  return report.all_passed() ? kExitOk : kExitFailure;
}

int cmd_report(const std::vector<std::string>& paths, const std::string& format,
               const std::vector<std::string>& objective_specs,
               const std::string& pareto_latency, std::ostream& out) {
  ReportDocument merged;
  for (const auto& path : paths) {
    ReportDocument doc;
    try {
      doc = load_json(read_file(path));
    } catch (const ParseError& e) {
      throw ParseError(e.line(), fmt::format("{}: {}", path, e.detail()));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParse) throw;
      throw Error(ErrorCode::kParse, fmt::format("{}: {}", path, e.what()));
    }
    for (auto& r : doc.records) merged.records.push_back(std::move(r));
    for (auto& f : doc.failures) merged.failures.push_back(std::move(f));
  }
  sort_for_report(merged.records);

  if (format == "json") {
    out << emit_json(merged);
    return kExitOk;
  }
  if (format == "csv") {
    out << emit_table(merged.records, TableFormat::kCsv);
    return kExitOk;
  }
  if (!merged.records.empty()) {
    out << emit_table(merged.records, TableFormat::kText, {use_color(out)});
  }
  for (const auto& f : merged.failures) {
    out << fmt::format("FAILED batch_size={}: {}\n", f.batch_size, f.message);
  }
  if (!merged.records.empty()) {
    std::vector<Objective> objectives;
    for (const auto& s : objective_specs) objectives.push_back(parse_objective(s));
    if (objectives.empty()) objectives = default_objectives(merged.records, pareto_latency);
    const auto analysis = pareto_frontier(merged.records, objectives);
    out << "\n" << render_frontier(merged.records, analysis, objectives);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Inference benchmark harness: latency, throughput, energy and "
               "carbon for protocol-speaking runners"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) {
      sub->add_option("--config", flags.config, "JSON run configuration")
          ->check(CLI::ExistingFile);
    }
    sub->add_flag("--quiet", flags.quiet, "print only errors");
  };

  auto* run = app.add_subcommand("run", "execute one benchmark run");
  add_common(run, true);
  run->get_option("--config")->required();
  run->add_option("--output", flags.output, "output directory (overrides config)");
  run->add_option("--seed", flags.seed, "arrival seed (overrides config)");

  auto* sweep = app.add_subcommand("sweep", "run once per batch_sweep entry");
  add_common(sweep, true);
  sweep->get_option("--config")->required();
  sweep->add_option("--output", flags.output, "output directory (overrides config)");
  sweep->add_option("--seed", flags.seed, "arrival seed (overrides config)");

  std::string run_dir;
  auto* replay = app.add_subcommand("replay", "recompute a stored run's report");
  replay->add_option("run-dir", run_dir, "directory written by run or sweep")
      ->required()
      ->check(CLI::ExistingDirectory);
  replay->add_option("--output", flags.output,
                     "output directory (default: <run-dir>/replay)");
  add_common(replay, false);

  std::string runner_cmd;
  std::string tcp;
  bool transcripts = false;
  auto* conformance =
      app.add_subcommand("conformance", "check a runner against the protocol");
  add_common(conformance, true);
  conformance->add_option("--runner", runner_cmd, "runner command line (stdio)");
  conformance->add_option("--tcp", tcp, "runner endpoint host:port");
  conformance->add_flag("--transcripts", transcripts,
                        "print transcripts for passing checks too");

  std::vector<std::string> reports;
  std::string format = "text";
  std::vector<std::string> objectives;
  std::string pareto_latency = "p95";
  auto* report = app.add_subcommand("report", "merge and re-render report.json files");
  report->add_option("reports", reports, "report.json files")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--format", format, "text, csv or json")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  report->add_option("--objective", objectives,
                     "Pareto objective metric:min|max (repeatable)");
  report->add_option("--pareto-latency", pareto_latency,
                     "latency statistic for the default objectives")
      ->check(CLI::IsMember({"mean", "p50", "p95", "p99"}));
  add_common(report, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (run->parsed()) return cmd_measure(flags, false, out, err);
    if (sweep->parsed()) return cmd_measure(flags, true, out, err);
    if (replay->parsed()) return cmd_replay(run_dir, flags, out);
    if (conformance->parsed()) {
      return cmd_conformance(flags, runner_cmd, tcp, transcripts, out);
    }
    return cmd_report(reports, format, objectives, pareto_latency, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace ibench
