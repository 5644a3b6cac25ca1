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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ibench/clock.hpp"
#include "ibench/error.hpp"
#include "ibench/metrics.hpp"
#include "ibench/subprocess.hpp"

namespace ibench::testing {

/// Sample whose service and response intervals are given in nanoseconds.
LatencySample sample_ns(std::uint64_t id, DurationNs service_ns,
                        DurationNs queue_ns = 0, std::uint32_t batch = 1,
                        Outcome outcome = Outcome::kSuccess);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const;

 private:
  std::string path_;
};

/// Error code thrown by `fn`, or nullopt when it returns normally.
std::optional<ErrorCode> code_of(const std::function<void()>& fn);

/// Clock under test control.
class ManualClock : public Clock {
 public:
  TimestampNs now() const override { return t_; }
  void set(TimestampNs t) { t_ = t; }
  void advance(DurationNs d) { t_ += d; }

 private:
  TimestampNs t_ = 0;
};

bool relative_close(double a, double b, double rel);

/// Fake runner child listening on an ephemeral loopback TCP port.
class TcpRunnerProcess {
 public:
  TcpRunnerProcess(const std::string& binary, std::vector<std::string> args);

  std::uint16_t port() const { return port_; }
  std::string endpoint() const;

 private:
  TempDir dir_;
  std::optional<Subprocess> child_;
  std::uint16_t port_ = 0;
};

/// A loopback port with nothing listening on it.
std::uint16_t unused_port();

}  // namespace ibench::testing
