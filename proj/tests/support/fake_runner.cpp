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

#include "fake_runner.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <vector>

#include "ibench/error.hpp"
#include "ibench/subprocess.hpp"

namespace ibench::testing {

namespace {

std::int64_t steady_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

InferResponse process(const FakeRunnerSpec& spec, const InferRequest& request,
                      std::size_t ordinal) {
  InferResponse r;
  r.id = spec.wrong_ids ? request.id + 1000 : request.id;
  const bool injected =
      (spec.error_batch_size && request.batch_size == *spec.error_batch_size) ||
      (spec.error_every && ordinal % *spec.error_every == 0);
  if (request.batch_size == 0 || injected) {
    r.ok = false;
    r.message = request.batch_size == 0 ? "batch_size must be >= 1"
                                        : "injected failure";
    return r;
  }
  const auto start = std::chrono::steady_clock::now();
  r.runner_start_ns = steady_ns();
  const double service_ms =
      spec.base_delay_ms + spec.per_item_ms * request.batch_size;
  if (service_ms > 0.0) {
    std::this_thread::sleep_until(
        start + std::chrono::nanoseconds(static_cast<std::int64_t>(service_ms * 1e6)));
  }
  r.runner_end_ns = steady_ns();
  r.ok = true;
  if (spec.hello.item_kind == ItemKind::kToken) {
    r.items_processed = request.sequence_length
                            ? static_cast<std::uint64_t>(*request.sequence_length)
                            : spec.tokens_per_request;
  } else {
    r.items_processed = request.batch_size;
  }
  return r;
}

}  // namespace

Handshake FakeRunnerSpec::default_hello() {
  Handshake h;
  h.model_name = "fake-model";
  h.platform = "fake-runtime";
  h.precision = Precision::kFP16;
  h.item_kind = ItemKind::kSample;
  h.device = {"fake-device", Interconnect::kPCIe, MemoryType::kGDDR, "default"};
  return h;
}

int serve(const FakeRunnerSpec& spec, int in_fd, int out_fd) {
  ignore_sigpipe();
  auto send = [out_fd](const std::string& line) {
    return write_all(out_fd, line + "\n");
  };

  if (spec.malformed_hello) {
    send(R"({"type":"hello","protocol_version":)");
    return 1;
  }
  if (!send(encode(spec.hello))) return 1;

  LineReader reader(in_fd);
  std::size_t answered = 0;
  std::size_t received = 0;
  std::size_t processed = 0;
  std::vector<InferRequest> window;

  auto flush = [&]() -> bool {
    std::vector<InferResponse> out;
    for (const auto& req : window) out.push_back(process(spec, req, ++processed));
    window.clear();
    for (auto it = out.rbegin(); it != out.rend(); ++it) {
      if (!send(encode(*it))) return false;
      ++answered;
      if (spec.exit_after && answered >= *spec.exit_after) return false;
    }
    return true;
  };

  while (true) {
    std::optional<std::string> line;
    try {
      // While holding a partial window, wait briefly for more requests.
      line = window.empty()
                 ? reader.read_line()
                 : reader.read_line(std::chrono::milliseconds(50));
    } catch (const Error&) {
      if (!flush()) return 3;
      continue;
    }
    if (!line) return 0;
    if (line->empty()) continue;

    MessageType type;
    try {
      type = peek_type(*line, 0);
    } catch (const Error& e) {
      InferResponse err;
      err.ok = false;
      err.message = e.what();
      send(encode(err));
      continue;
    }
    if (type == MessageType::kHelloAck) continue;
    if (type == MessageType::kShutdown) {
      if (spec.ignore_shutdown) continue;
      return 0;
    }
    if (type != MessageType::kInfer) continue;

    InferRequest request;
    try {
      request = decode_request(*line, 0);
    } catch (const Error& e) {
      InferResponse err;
      err.ok = false;
      err.message = e.what();
      send(encode(err));
      continue;
    }
    if (spec.stall_request && received++ == *spec.stall_request) continue;
    window.push_back(request);
    if (window.size() >= spec.reorder_window) {
      if (!flush()) return 3;
    }
  }
}

InProcessRunner::InProcessRunner(FakeRunnerSpec spec) {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    throw Error(ErrorCode::kSpawn, "socketpair failed");
  }
  harness_end_ = std::make_shared<UniqueFd>(fds[0]);
  runner_end_ = UniqueFd(fds[1]);
  thread_ = std::thread([this, spec = std::move(spec)] {
    exit_code_ = serve(spec, runner_end_.get(), runner_end_.get());
    ::shutdown(runner_end_.get(), SHUT_RDWR);
  });
}

InProcessRunner::~InProcessRunner() {
  harness_end_.reset();
  ::shutdown(runner_end_.get(), SHUT_RDWR);
  if (thread_.joinable()) thread_.join();
}

TransportConfig InProcessRunner::transport() {
  if (!harness_end_) throw Error(ErrorCode::kInvalidArgument, "transport taken");
  return ConnectedTransport{std::exchange(harness_end_, nullptr)};
}

}  // namespace ibench::testing
