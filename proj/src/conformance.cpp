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

#include "ibench/conformance.hpp"

#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>

#include <fmt/format.h>

#include "ibench/error.hpp"

namespace ibench {

namespace {

constexpr const char* kCheckNames[] = {"handshake", "sequential_infer",
                                       "id_matching", "error_response",
                                       "shutdown"};

/// Expected items for an ok response; tokens depend on the runner.
bool items_match(const Handshake& hello, const InferRequest& req,
                 const InferResponse& resp) {
  if (hello.item_kind == ItemKind::kToken) {
    return req.sequence_length
               ? resp.items_processed ==
                     static_cast<std::uint64_t>(*req.sequence_length)
               : resp.items_processed > 0;
  }
  return resp.items_processed == req.batch_size;
}

std::vector<std::string> new_lines(const RunnerSession& session,
                                   std::size_t& seen) {
  auto all = session.transcript();
  std::vector<std::string> out;
  if (seen < all.size()) out.assign(all.begin() + static_cast<long>(seen), all.end());
  seen = all.size();
  return out;
}

std::string violation_text(const RunnerSession& session, std::size_t& seen) {
  auto v = session.violations();
  std::string out;
  for (std::size_t i = seen; i < v.size(); ++i) {
    if (!out.empty()) out += "; ";
    out += v[i];
  }
  seen = v.size();
  return out;
}

ConformanceCheck sequential_check(RunnerSession& s,
                                  const ConformanceOptions& opt) {
  ConformanceCheck c{"sequential_infer", true, "", {}};
  std::uint64_t id = 1;
  for (std::uint32_t batch : {1u, 8u, 32u}) {
    InferRequest req{id++, batch, std::nullopt, std::nullopt};
    if (s.handshake().item_kind == ItemKind::kToken) req.sequence_length = 16;
    try {
      const auto done = s.infer(req, opt.request_timeout);
      if (!done.response.ok) {
        c.passed = false;
        c.detail = fmt::format("request {} failed: {}", req.id,
                               done.response.message);
        return c;
      }
      if (!items_match(s.handshake(), req, done.response)) {
        c.passed = false;
        c.detail = fmt::format("request {} (batch {}) reported {} items",
                               req.id, batch, done.response.items_processed);
        return c;
      }
    } catch (const Error& e) {
      c.passed = false;
      c.detail = fmt::format("request {}: {}", req.id, e.what());
      return c;
    }
  }
  c.detail = "3 sequential requests answered with matching ids and items";
  return c;
}

ConformanceCheck id_matching_check(RunnerSession& s,
                                   const ConformanceOptions& opt) {
  ConformanceCheck c{"id_matching", true, "", {}};
  constexpr std::uint64_t kFirst = 100;
  constexpr int kCount = 4;

  // Shared so a result racing the timeout never touches a dead frame.
  struct State {
    std::mutex m;
    std::condition_variable cv;
    std::map<std::uint64_t, Completion> done;
    std::vector<std::uint64_t> arrival;
  };
  auto st = std::make_shared<State>();
  try {
    for (int i = 0; i < kCount; ++i) {
      InferRequest req{kFirst + static_cast<std::uint64_t>(i),
                       static_cast<std::uint32_t>(i + 1), std::nullopt,
                       std::nullopt};
      s.submit(req, [st, id = req.id](const Completion& comp) {
        std::lock_guard lock(st->m);
        st->done.emplace(id, comp);
        st->arrival.push_back(comp.response.id);
        st->cv.notify_all();
      });
    }
  } catch (const Error& e) {
    c.passed = false;
    c.detail = e.what();
    return c;
  }

  std::unique_lock lock(st->m);
  const bool all = st->cv.wait_for(lock, opt.request_timeout,
                                   [&] { return st->done.size() == kCount; });
  const auto done = st->done;
  const auto arrival = st->arrival;
  lock.unlock();
  if (!all) {
    for (int i = 0; i < kCount; ++i) s.cancel(kFirst + static_cast<std::uint64_t>(i));
    c.passed = false;
    c.detail = fmt::format("{} of {} concurrent requests matched a result",
                           done.size(), kCount);
    return c;
  }
  for (const auto& [id, comp] : done) {
    if (comp.transport_error) {
      c.passed = false;
      c.detail = *comp.transport_error;
      return c;
    }
    if (comp.response.id != id || !comp.response.ok) {
      c.passed = false;
      c.detail = fmt::format("request {} matched result {}", id, comp.response.id);
      return c;
    }
  }
  bool reordered = false;
  for (std::size_t i = 1; i < arrival.size(); ++i) {
    reordered |= arrival[i] < arrival[i - 1];
  }
  c.detail = fmt::format("{} concurrent requests matched by id (arrival {})",
                         kCount, reordered ? "out of order" : "in order");
  return c;
}

ConformanceCheck error_check(RunnerSession& s, const ConformanceOptions& opt) {
  ConformanceCheck c{"error_response", true, "", {}};
  try {
    // batch_size 0 is invalid by contract; the runner must say so.
    const auto bad = s.infer({200, 0, std::nullopt, std::nullopt},
                             opt.request_timeout);
    if (bad.response.ok) {
      c.passed = false;
      c.detail = "batch_size 0 was accepted instead of answered with an error";
      return c;
    }
    if (bad.response.message.empty()) {
      c.passed = false;
      c.detail = "error result carries no message";
      return c;
    }
    const auto good = s.infer({201, 1, std::nullopt, std::nullopt},
                              opt.request_timeout);
    if (!good.response.ok) {
      c.passed = false;
      c.detail = "runner did not recover after an error result";
      return c;
    }
    c.detail = fmt::format("error result '{}', next request served",
                           bad.response.message);
  } catch (const Error& e) {
    c.passed = false;
    c.detail = e.what();
  }
  return c;
}

}  // namespace

bool ConformanceReport::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return !checks.empty();
}

const ConformanceCheck* ConformanceReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string ConformanceReport::render_text(bool with_transcripts) const {
  std::string out = fmt::format("conformance: {}\n", transport);
  for (const auto& c : checks) {
    out += fmt::format("  [{}] {:<17} {}\n", c.passed ? "PASS" : "FAIL", c.name,
                       c.detail);
    if (with_transcripts || !c.passed) {
      for (const auto& line : c.transcript) out += fmt::format("        {}\n", line);
    }
  }
  out += all_passed() ? "result: conformant\n" : "result: NOT conformant\n";
  return out;
}

ConformanceReport check_conformance(const TransportConfig& transport,
                                    const Clock& clock,
                                    ConformanceOptions options) {
  ConformanceReport report;
  report.transport = describe(transport);

  std::unique_ptr<RunnerSession> session;
  ConformanceCheck hello{"handshake", false, "", {}};
  try {
    session = RunnerSession::open(transport, clock, options.session);
    hello.passed = true;
    const auto& h = session->handshake();
    hello.detail = fmt::format("v{} {} on {} ({}, {})", h.protocol_version,
                               h.model_name, h.platform, to_string(h.precision),
                               h.device.device_name);
  } catch (const std::exception& e) {
    hello.detail = e.what();
  }
  if (!session) {
    report.checks.push_back(std::move(hello));
    for (std::size_t i = 1; i < std::size(kCheckNames); ++i) {
      report.checks.push_back(
          {kCheckNames[i], false, "skipped: no session", {}});
    }
    return report;
  }

  std::size_t seen_lines = 0;
  std::size_t seen_violations = 0;
  hello.transcript = new_lines(*session, seen_lines);
  report.checks.push_back(std::move(hello));

  auto finish = [&](ConformanceCheck c) {
    const std::string v = violation_text(*session, seen_violations);
    if (!v.empty()) {
      c.passed = false;
      c.detail += c.detail.empty() ? v : "; " + v;
    }
    c.transcript = new_lines(*session, seen_lines);
    report.checks.push_back(std::move(c));
  };
  finish(sequential_check(*session, options));
  finish(id_matching_check(*session, options));
  finish(error_check(*session, options));

  ConformanceCheck bye{"shutdown", true, "", {}};
  const bool was_ready = session->state() == SessionState::kReady;
  const auto status = session->close(options.request_timeout);
  if (!was_ready) {
    bye.passed = false;
    bye.detail = "runner went away before shutdown was sent";
    if (status) bye.detail += fmt::format(" ({})", status->describe());
  } else if (status) {
    bye.passed = status->success();
    bye.detail = fmt::format("runner {}", status->describe());
  } else if (session->peer_closed()) {
    bye.detail = "runner closed the connection";
  } else {
    bye.passed = false;
    bye.detail = "runner ignored shutdown";
  }
  finish(std::move(bye));
  return report;
}

}  // namespace ibench
