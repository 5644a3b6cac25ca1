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

#include "ibench/power_source.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>

#include <fmt/format.h>

#include "ibench/error.hpp"
#include "ibench/subprocess.hpp"

namespace ibench {

SyntheticWaveform SyntheticWaveform::constant(double watts) {
  SyntheticWaveform w;
  w.shape = Shape::kConstant;
  w.base_w = watts;
  return w;
}

SyntheticWaveform SyntheticWaveform::ramp(double from_w, double to_w,
                                          double over_s) {
  SyntheticWaveform w;
  w.shape = Shape::kRamp;
  w.base_w = from_w;
  w.target_w = to_w;
  w.ramp_s = over_s;
  return w;
}

SyntheticWaveform SyntheticWaveform::sinusoid(double mean_w, double amplitude_w,
                                              double period_s) {
  SyntheticWaveform w;
  w.shape = Shape::kSinusoid;
  w.base_w = mean_w;
  w.amplitude_w = amplitude_w;
  w.period_s = period_s;
  return w;
}

double SyntheticWaveform::evaluate(double seconds) const {
  double p = base_w;
  switch (shape) {
    case Shape::kConstant:
      break;
    case Shape::kRamp:
      p = seconds >= ramp_s
              ? target_w
              : base_w + (target_w - base_w) * (std::max(seconds, 0.0) / ramp_s);
      break;
    case Shape::kSinusoid:
      p = base_w +
          amplitude_w * std::sin(2.0 * std::numbers::pi * seconds / period_s);
      break;
  }
  return std::max(p, 0.0);
}

std::string_view to_string(SyntheticWaveform::Shape shape) {
  switch (shape) {
    case SyntheticWaveform::Shape::kConstant: return "constant";
    case SyntheticWaveform::Shape::kRamp: return "ramp";
    case SyntheticWaveform::Shape::kSinusoid: return "sinusoid";
  }
  return "?";
}

std::string_view PowerSourceConfig::kind() const {
  switch (source.index()) {
    case 0: return "synthetic";
    case 1: return "replay";
    default: return "external-command";
  }
}

void validate(const PowerSourceConfig& config) {
  if (!(config.interval_ms > 0.0) || !std::isfinite(config.interval_ms)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("interval_ms must be > 0 (got {})",
                            config.interval_ms));
  }
  if (const auto* w = std::get_if<SyntheticWaveform>(&config.source)) {
    if (w->base_w < 0.0 || w->target_w < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "synthetic power must be >= 0");
    }
    if (w->shape == SyntheticWaveform::Shape::kRamp && !(w->ramp_s > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "ramp duration must be > 0");
    }
    if (w->shape == SyntheticWaveform::Shape::kSinusoid &&
        !(w->period_s > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "sinusoid period must be > 0");
    }
  } else if (const auto* r = std::get_if<ReplaySource>(&config.source)) {
    if (r->path.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "replay path is empty");
    }
    if (r->alignment != "rebase") {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("unsupported replay alignment '{}' (only "
                              "'rebase')",
                              r->alignment));
    }
  } else if (const auto* c = std::get_if<ExternalCommandSource>(&config.source)) {
    if (c->argv.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "external command is empty");
    }
  }
}

namespace {

double parse_watts(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(value) || value < 0.0) {
    throw Error(ErrorCode::kPowerSource,
                fmt::format("sampler printed '{}', expected watts", text));
  }
  return value;
}

std::string default_source_id(const PowerSourceConfig& config) {
  if (!config.source_id.empty()) return config.source_id;
  if (const auto* w = std::get_if<SyntheticWaveform>(&config.source)) {
    return fmt::format("synthetic:{}", to_string(w->shape));
  }
  if (const auto* r = std::get_if<ReplaySource>(&config.source)) {
    return fmt::format("replay:{}", r->path);
  }
  return fmt::format("external:{}",
                     std::get<ExternalCommandSource>(config.source).argv[0]);
}

/// Shared recording state: one writer appends, stop() seals.
class LiveSession : public SamplingSession {
 public:
  LiveSession(const Clock& clock, std::string source_id)
      : clock_(clock), source_id_(std::move(source_id)) {}

  const PowerTrace& stop() final {
    std::lock_guard stop_lock(stop_mutex_);
    if (!sealed_) {
      {
        std::lock_guard lock(mutex_);
        stopping_ = true;
      }
      wake_.notify_all();
      shutdown();
      if (!error_) {
        try {
          TimestampNs t = clock_.now();
          if (!samples_.empty()) t = std::max(t, samples_.back().timestamp + 1);
          append(t, final_reading(t));
        } catch (const Error& e) {
          error_ = e.what();
        }
      }
      if (!error_) {
        trace_ = PowerTrace(std::move(samples_), source_id_);
      }
      sealed_ = true;
    }
    if (error_) {
      throw Error(ErrorCode::kPowerSource,
                  fmt::format("power source '{}' aborted: {}", source_id_,
                              *error_));
    }
    return trace_;
  }

 protected:
  /// Joins worker threads and releases external resources.
  virtual void shutdown() = 0;
  // Reading stamped `t`, taken after the worker has stopped. `t` is nudged
  // past the last sample so a sealed trace always holds two samples.
  virtual double final_reading(TimestampNs t) = 0;

  /// Readings that do not advance time are dropped.
  void append(TimestampNs t, double watts) {
    std::lock_guard lock(mutex_);
    if (samples_.empty() || t > samples_.back().timestamp) {
      samples_.push_back({t, watts});
    }
  }

  void abort(std::string why) {
    std::lock_guard lock(mutex_);
    if (!error_) error_ = std::move(why);
  }

  /// Waits until `deadline` on clock_; false once stop was requested.
  bool wait_until(TimestampNs deadline) {
    std::unique_lock lock(mutex_);
    const auto left = std::chrono::nanoseconds(deadline - clock_.now());
    return !wake_.wait_for(lock, left, [this] { return stopping_; });
  }

  bool stopping() {
    std::lock_guard lock(mutex_);
    return stopping_;
  }

  const Clock& clock_;
  std::string source_id_;

 private:
  std::mutex stop_mutex_;
  std::mutex mutex_;
  std::condition_variable wake_;
  bool stopping_ = false;
  bool sealed_ = false;
  std::vector<PowerSample> samples_;
  std::optional<std::string> error_;
  PowerTrace trace_;
};

/// Polls a probe every interval. Ticks missed by a slow probe are skipped.
class TickSession final : public LiveSession {
 public:
  TickSession(const Clock& clock, std::string source_id, double interval_ms,
              std::function<double(TimestampNs)> probe)
      : LiveSession(clock, std::move(source_id)),
        interval_ns_(std::max<DurationNs>(
            1, static_cast<DurationNs>(std::llround(interval_ms * kNsPerMs)))),
        probe_(std::move(probe)) {
    const TimestampNs t0 = clock_.now();
    append(t0, probe_(t0));
    worker_ = std::thread([this, t0] { loop(t0); });
  }

  ~TickSession() override {
    try {
      stop();
    } catch (...) {
    }
  }

 private:
  void loop(TimestampNs t0) {
    std::int64_t tick = 1;
    while (wait_until(t0 + tick * interval_ns_)) {
      const TimestampNs now = clock_.now();
      try {
        append(now, probe_(now));
      } catch (const Error& e) {
        abort(e.what());
        return;
      }
      tick = std::max(tick + 1, (clock_.now() - t0) / interval_ns_ + 1);
    }
  }

  void shutdown() override {
    if (worker_.joinable()) worker_.join();
  }

  double final_reading(TimestampNs t) override { return probe_(t); }

  DurationNs interval_ns_;
  std::function<double(TimestampNs)> probe_;
  std::thread worker_;
};

/// Long-running sampler: every stdout line is a reading stamped on arrival.
class StreamingSession final : public LiveSession {
 public:
  StreamingSession(const Clock& clock, std::string source_id,
                   const std::vector<std::string>& argv)
      : LiveSession(clock, std::move(source_id)),
        child_(Subprocess::spawn(argv)),
        reader_(child_.stdout_fd()) {
    child_.close_stdin();
    // The first reading must exist before the run starts.
    auto line = reader_.read_line(std::chrono::seconds(10));
    if (!line) {
      const auto status = child_.wait_for(std::chrono::seconds(1));
      throw Error(ErrorCode::kPowerSource,
                  fmt::format("sampler '{}' produced no output ({})", argv[0],
                              status ? status->describe() : "still running"));
    }
    last_ = parse_watts(*line);
    append(clock_.now(), last_);
    worker_ = std::thread([this] { loop(); });
  }

  ~StreamingSession() override {
    try {
      stop();
    } catch (...) {
    }
  }

 private:
  void loop() {
    while (true) {
      std::optional<std::string> line;
      try {
        line = reader_.read_line();
      } catch (const Error& e) {
        abort(e.what());
        return;
      }
      if (!line) {
        if (!stopping()) {
          const auto status = child_.wait_for(std::chrono::seconds(1));
          abort(fmt::format("sampler ended mid-run ({})",
                            status ? status->describe() : "stdout closed"));
        }
        return;
      }
      if (line->empty()) continue;
      try {
        const double w = parse_watts(*line);
        last_.store(w);
        append(clock_.now(), w);
      } catch (const Error& e) {
        abort(e.what());
        return;
      }
    }
  }

  void shutdown() override {
    child_.kill();  // closes the write end; the reader sees EOF
    if (worker_.joinable()) worker_.join();
  }

  double final_reading(TimestampNs) override { return last_.load(); }

  Subprocess child_;
  LineReader reader_;
  std::atomic<double> last_{0.0};
  std::thread worker_;
};

/// A recorded trace re-based so that its first sample lands at session start.
class ReplaySession final : public SamplingSession {
 public:
  ReplaySession(const Clock& clock, const ReplaySource& source,
                std::string source_id) {
    PowerTrace file = load_trace_csv(source.path);
    if (file.size() < 2) {
      throw Error(ErrorCode::kInsufficientSamples,
                  fmt::format("replay file '{}' has {} sample(s); need 2",
                              source.path, file.size()));
    }
    const TimestampNs shift = clock.now() - file.front_time();
    std::vector<PowerSample> rebased = file.samples();
    for (auto& s : rebased) s.timestamp += shift;
    trace_ = PowerTrace(std::move(rebased), std::move(source_id));
  }

  const PowerTrace& stop() override { return trace_; }

 private:
  PowerTrace trace_;
};

}  // namespace

std::unique_ptr<SamplingSession> start_sampling(const PowerSourceConfig& config,
                                                const Clock& clock) {
  validate(config);
  std::string id = default_source_id(config);

  if (const auto* w = std::get_if<SyntheticWaveform>(&config.source)) {
    // Evaluated relative to the first sample, which is taken at start.
    auto origin = std::make_shared<std::optional<TimestampNs>>();
    auto probe = [wave = *w, origin](TimestampNs t) {
      if (!*origin) *origin = t;
      return wave.evaluate(static_cast<double>(t - **origin) / kNsPerSecond);
    };
    return std::make_unique<TickSession>(clock, std::move(id),
                                         config.interval_ms, probe);
  }
  if (const auto* r = std::get_if<ReplaySource>(&config.source)) {
    return std::make_unique<ReplaySession>(clock, *r, std::move(id));
  }

  const auto& cmd = std::get<ExternalCommandSource>(config.source);
  if (cmd.mode == ExternalCommandSource::Mode::kStreaming) {
    return std::make_unique<StreamingSession>(clock, std::move(id), cmd.argv);
  }
  const auto budget = std::chrono::milliseconds(
      std::max<long>(5000, std::lround(config.interval_ms * 10)));
  auto probe = [argv = cmd.argv, budget](TimestampNs) {
    const std::string out = run_and_capture(argv, budget);
    return parse_watts(out.substr(0, out.find('\n')));
  };
  return std::make_unique<TickSession>(clock, std::move(id), config.interval_ms,
                                       probe);
}

}  // namespace ibench
