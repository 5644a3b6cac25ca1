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

// Deterministic-delay runner used by the tests: service time for a batch of
// B items is base_delay_ms + per_item_ms * B. Fault switches let the
// conformance and error-path tests script misbehaving runners.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <thread>

#include "ibench/protocol.hpp"
#include "ibench/session.hpp"

namespace ibench::testing {

struct FakeRunnerSpec {
  double base_delay_ms = 0.0;
  double per_item_ms = 0.0;
  Handshake hello = default_hello();
  // Items reported for item_kind=token requests without a sequence length.
  std::uint64_t tokens_per_request = 128;
  // Buffer up to this many requests and answer them in reverse order.
  std::size_t reorder_window = 1;

  // Faults.
  bool wrong_ids = false;
  std::optional<std::size_t> exit_after;  // exit(3) after this many results
  std::optional<std::uint32_t> error_batch_size;
  std::optional<std::size_t> error_every;  // fail every n-th request
  bool malformed_hello = false;
  bool ignore_shutdown = false;
  // Never answers the request with this 0-based arrival index.
  std::optional<std::size_t> stall_request;

  static Handshake default_hello();
};

/// Speaks the protocol on the given descriptors until shutdown or EOF.
/// Returns the process exit code the runner would use.
int serve(const FakeRunnerSpec& spec, int in_fd, int out_fd);

/// Runs serve() on a thread behind a socketpair.
class InProcessRunner {
 public:
  explicit InProcessRunner(FakeRunnerSpec spec);
  ~InProcessRunner();
  InProcessRunner(const InProcessRunner&) = delete;
  InProcessRunner& operator=(const InProcessRunner&) = delete;

  /// Hands out the harness end of the socketpair; callable once.
  TransportConfig transport();
  std::optional<int> exit_code() const { return exit_code_; }

 private:
  std::shared_ptr<UniqueFd> harness_end_;
  UniqueFd runner_end_;
  std::thread thread_;
  std::optional<int> exit_code_;
};

}  // namespace ibench::testing
