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

// POSIX plumbing shared by runner transports and the external power sampler:
// owned file descriptors, child processes on pipes, and line-buffered reads.

#pragma once

#include <sys/types.h>

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ibench {

class UniqueFd {
 public:
  UniqueFd() = default;
  explicit UniqueFd(int fd) : fd_(fd) {}
  UniqueFd(UniqueFd&& other) noexcept : fd_(other.release()) {}
  UniqueFd& operator=(UniqueFd&& other) noexcept;
  UniqueFd(const UniqueFd&) = delete;
  UniqueFd& operator=(const UniqueFd&) = delete;
  ~UniqueFd() { reset(); }

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release();
  void reset(int fd = -1);

 private:
  int fd_ = -1;
};

/// SIGPIPE would kill the harness when a runner dies with requests in
/// flight; writes report EPIPE instead once this has run.
void ignore_sigpipe();

/// Writes the whole buffer. Returns false if the peer is gone.
bool write_all(int fd, std::string_view data);

struct ExitStatus {
  bool exited = false;  // false: killed by a signal
  int code = 0;         // exit code or signal number

  bool success() const { return exited && code == 0; }
  std::string describe() const;
};

/// A child process whose stdin and stdout are pipes owned by the parent.
/// stderr is inherited. The destructor kills and reaps a still-running child.
class Subprocess {
 public:
  /// argv[0] is resolved through PATH. Throws ErrorCode::kSpawn on failure.
  static Subprocess spawn(const std::vector<std::string>& argv);

  Subprocess(Subprocess&& other) noexcept;
  Subprocess& operator=(Subprocess&& other) noexcept;
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;
  ~Subprocess();

  pid_t pid() const { return pid_; }
  int stdin_fd() const { return stdin_.get(); }
  int stdout_fd() const { return stdout_.get(); }
  void close_stdin() { stdin_.reset(); }
  UniqueFd take_stdin() { return std::move(stdin_); }
  UniqueFd take_stdout() { return std::move(stdout_); }

  /// Waits up to `timeout` for exit; nullopt if still running.
  std::optional<ExitStatus> wait_for(std::chrono::milliseconds timeout);
  std::optional<ExitStatus> exit_status() const { return status_; }
  void kill();

 private:
  Subprocess() = default;

  pid_t pid_ = -1;
  UniqueFd stdin_;
  UniqueFd stdout_;
  std::optional<ExitStatus> status_;
};

/// Runs `argv` to completion and returns its stdout. Throws kSpawn if it
/// cannot start, kTimeout if it outlives `timeout`, and kIo on a non-zero
/// exit.
std::string run_and_capture(const std::vector<std::string>& argv,
                            std::chrono::milliseconds timeout);

/// Buffered newline-delimited reader over a blocking descriptor.
class LineReader {
 public:
  explicit LineReader(int fd) : fd_(fd) {}

  /// Next line without its '\n'. nullopt at end of stream. Throws
  /// ErrorCode::kTimeout when `timeout` elapses first (no timeout if unset).
  std::optional<std::string> read_line(
      std::optional<std::chrono::milliseconds> timeout = std::nullopt);

 private:
  int fd_;
  std::string buffer_;
  bool eof_ = false;
};

/// Splits a command line on whitespace; no quoting rules.
std::vector<std::string> split_command(std::string_view command);

}  // namespace ibench
