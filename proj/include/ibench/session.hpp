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

// Harness side of a runner connection. One session owns one transport;
// outbound writes are serialized and inbound results are demultiplexed by
// request id to whichever caller is waiting.

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "ibench/clock.hpp"
#include "ibench/protocol.hpp"
#include "ibench/subprocess.hpp"

namespace ibench {

/// Child process speaking the protocol on stdin/stdout.
struct CommandTransport {
  std::vector<std::string> argv;
};

struct TcpTransport {
  std::string host;
  std::uint16_t port = 0;
};

/// An already-connected bidirectional descriptor (socketpair, accepted
/// socket). Used for in-process runners.
struct ConnectedTransport {
  std::shared_ptr<UniqueFd> fd;
};

using TransportConfig =
    std::variant<CommandTransport, TcpTransport, ConnectedTransport>;

std::string describe(const TransportConfig& transport);

/// Parses "host:port". Throws ErrorCode::kInvalidArgument.
TcpTransport parse_tcp_endpoint(std::string_view endpoint);

struct SessionOptions {
  // Bounds TCP connect plus waiting for the runner's hello.
  std::chrono::milliseconds connect_timeout{10000};
  std::size_t transcript_limit = 256;
};

enum class SessionState { kConnecting, kReady, kClosed };

struct Completion {
  InferResponse response;
  TimestampNs actual_start = 0;
  TimestampNs end = 0;
  // Set when the transport closed before a result arrived.
  std::optional<std::string> transport_error;
};

class RunnerSession {
 public:
  using Callback = std::function<void(const Completion&)>;

  /// Connects, reads and validates the hello, and acknowledges it.
  /// Throws kSpawn, kTimeout, ParseError (line 1 for a malformed hello) or
  /// kHandshake on a version mismatch.
  static std::unique_ptr<RunnerSession> open(TransportConfig transport,
                                             const Clock& clock,
                                             SessionOptions options = {});

  ~RunnerSession();
  RunnerSession(const RunnerSession&) = delete;
  RunnerSession& operator=(const RunnerSession&) = delete;

  SessionState state() const { return state_.load(); }
  const Handshake& handshake() const { return handshake_; }
  const Clock& clock() const { return clock_; }

  /// Sends `request` and returns the harness send timestamp. `on_done` runs
  /// exactly once on the reader thread, unless cancel() wins first.
  /// Throws kSessionClosed outside the ready state and kProtocol for an id
  /// that is already in flight.
  TimestampNs submit(const InferRequest& request, Callback on_done);

  /// Forgets a pending request; a late result for it is dropped silently.
  /// True if the request was still pending.
  bool cancel(std::uint64_t id);

  /// Blocking round trip. Throws kTimeout (request cancelled) or
  /// kSessionClosed.
  Completion infer(const InferRequest& request,
                   std::chrono::milliseconds timeout);

  /// Sends shutdown and waits for the runner to go away. Returns the exit
  /// status for child-process transports. Idempotent.
  std::optional<ExitStatus> close(
      std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

  /// Results that matched no outstanding or cancelled request, and other
  /// inbound lines that broke the protocol.
  std::vector<std::string> violations() const;
  /// Most recent lines, prefixed "> " (sent) or "< " (received).
  std::vector<std::string> transcript() const;
  std::size_t in_flight() const;
  /// Fresh id for this session; ids are never reused.
  std::uint64_t next_request_id() { return next_id_.fetch_add(1); }
  /// After close(): whether the runner ended the stream on its own rather
  /// than being cut off at the timeout.
  bool peer_closed() const;

 private:
  RunnerSession(const Clock& clock, SessionOptions options);

  void send_line(const std::string& line);
  void reader_loop();
  void fail_pending(const std::string& why);
  void note(std::string line);
  void violation(std::string what);

  const Clock& clock_;
  SessionOptions options_;
  std::atomic<SessionState> state_{SessionState::kConnecting};
  std::atomic<std::uint64_t> next_id_{1};
  Handshake handshake_;

  std::optional<Subprocess> child_;
  UniqueFd read_fd_;
  UniqueFd write_fd_;
  std::shared_ptr<UniqueFd> shared_fd_;
  bool is_socket_ = false;
  std::unique_ptr<LineReader> reader_;
  std::thread reader_thread_;
  std::size_t lines_read_ = 0;

  std::mutex write_mutex_;
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, std::pair<TimestampNs, Callback>> pending_;
  std::unordered_set<std::uint64_t> cancelled_;
  std::deque<std::string> transcript_;
  std::vector<std::string> violations_;
  std::condition_variable eof_cv_;
  bool eof_ = false;
  bool closed_ = false;
  bool peer_closed_ = false;
  std::optional<ExitStatus> exit_status_;
};

}  // namespace ibench
