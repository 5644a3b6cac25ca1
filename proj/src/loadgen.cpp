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

#include "ibench/loadgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <future>
#include <mutex>
#include <random>
#include <thread>

#include <fmt/format.h>

namespace ibench {

namespace {

/// Outcome of one synchronous request issued by a closed-loop worker.
struct Attempt {
  LatencySample sample;
  std::optional<std::string> transport_error;
};

InferRequest make_request(RunnerSession& session, const TrafficModel& traffic) {
  InferRequest req;
  req.id = session.next_request_id();
  req.batch_size = traffic.batch_size;
  req.sequence_length = traffic.sequence_length;
  return req;
}

void fill_from(LatencySample& sample, const Completion& c) {
  sample.actual_start = std::max(sample.intended_start, c.actual_start);
  sample.end = std::max(sample.actual_start, c.end);
  sample.outcome = c.response.ok && !c.transport_error ? Outcome::kSuccess
                                                       : Outcome::kError;
  sample.runner_start_ns = c.response.runner_start_ns;
  sample.runner_end_ns = c.response.runner_end_ns;
}

Attempt issue_and_wait(RunnerSession& session, const TrafficModel& traffic,
                       std::chrono::milliseconds timeout) {
  const Clock& clock = session.clock();
  const InferRequest req = make_request(session, traffic);
  Attempt a;
  a.sample.request_id = req.id;
  a.sample.batch_size = req.batch_size;
  a.sample.intended_start = clock.now();

  auto promise = std::make_shared<std::promise<Completion>>();
  auto future = promise->get_future();
  try {
    a.sample.actual_start = session.submit(
        req, [promise](const Completion& c) { promise->set_value(c); });
  } catch (const Error& e) {
    a.sample.actual_start = a.sample.end = clock.now();
    a.sample.outcome = Outcome::kError;
    a.transport_error = e.what();
    return a;
  }
  if (future.wait_for(timeout) == std::future_status::timeout &&
      session.cancel(req.id)) {
    a.sample.end = std::max(a.sample.actual_start, clock.now());
    a.sample.outcome = Outcome::kError;
    return a;
  }
  const Completion c = future.get();
  fill_from(a.sample, c);
  a.transport_error = c.transport_error;
  return a;
}

struct Collected {
  std::vector<LatencySample> samples;
  std::optional<std::string> transport_error;
};

Collected run_closed_loop(const RunPlan& plan, RunnerSession& session,
                          std::uint32_t concurrency) {
  const auto& traffic = plan.traffic;
  const Clock& clock = session.clock();
  const std::optional<TimestampNs> stop_at =
      traffic.duration_s
          ? std::optional(clock.now() + static_cast<DurationNs>(
                                            *traffic.duration_s * kNsPerSecond))
          : std::nullopt;

  std::mutex m;
  Collected out;
  std::atomic<std::uint64_t> claimed{0};
  std::atomic<bool> broken{false};

  auto worker = [&] {
    while (!broken.load()) {
      const std::uint64_t n = claimed.fetch_add(1);
      if (traffic.iterations && n >= *traffic.iterations) break;
      if (stop_at && clock.now() >= *stop_at) break;
      Attempt a = issue_and_wait(session, traffic, plan.request_timeout);
      std::lock_guard lock(m);
      if (a.transport_error) {
        broken = true;
        if (!out.transport_error) out.transport_error = a.transport_error;
        continue;
      }
      out.samples.push_back(a.sample);
    }
  };

  if (concurrency == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::uint32_t i = 0; i < concurrency; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return out;
}

Collected run_open_loop(const RunPlan& plan, RunnerSession& session) {
  const auto& traffic = plan.traffic;
  const Clock& clock = session.clock();
  const auto schedule =
      generate_arrivals(traffic.rate_rps, *traffic.duration_s, traffic.seed);
  const DurationNs timeout_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(plan.request_timeout)
          .count();

  struct Slot {
    LatencySample sample;
    TimestampNs deadline = 0;
    bool done = false;
    bool transport_failed = false;
  };
  struct State {
    std::mutex m;
    std::condition_variable cv;
    std::vector<Slot> slots;
    std::deque<std::size_t> outstanding;  // dispatch order == deadline order
    std::size_t in_flight = 0;
    std::optional<std::string> transport_error;
  };
  auto st = std::make_shared<State>();
  st->slots.resize(schedule.size());

  // Caller holds st->m.
  auto reap_timeouts = [&](TimestampNs now) {
    while (!st->outstanding.empty()) {
      Slot& slot = st->slots[st->outstanding.front()];
      if (slot.done) {
        st->outstanding.pop_front();
        continue;
      }
      if (slot.deadline > now) break;
      if (session.cancel(slot.sample.request_id)) {
        slot.done = true;
        slot.sample.end = std::max(slot.sample.actual_start, now);
        slot.sample.outcome = Outcome::kError;
        --st->in_flight;
      }
      st->outstanding.pop_front();
    }
  };
  auto next_wake = [&](TimestampNs now) {
    for (std::size_t idx : st->outstanding) {
      if (!st->slots[idx].done) {
        return std::chrono::nanoseconds(
            std::max<DurationNs>(st->slots[idx].deadline - now, 0));
      }
    }
    return std::chrono::nanoseconds(std::chrono::milliseconds(50));
  };

  std::size_t dispatched = 0;
  const TimestampNs base = clock.now();
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const TimestampNs intended = base + schedule[i];
    {
      std::unique_lock lock(st->m);
      while (st->in_flight >= plan.max_in_flight && !st->transport_error) {
        st->cv.wait_for(lock, next_wake(clock.now()));
        reap_timeouts(clock.now());
      }
      if (st->transport_error) break;
      reap_timeouts(clock.now());
    }
    sleep_until_ns(clock, intended);

    const InferRequest req = make_request(session, traffic);
    {
      std::lock_guard lock(st->m);
      Slot& slot = st->slots[i];
      slot.sample.request_id = req.id;
      slot.sample.batch_size = req.batch_size;
      slot.sample.intended_start = intended;
      ++st->in_flight;
    }
    try {
      const TimestampNs sent =
          session.submit(req, [st, i, &clock](const Completion& c) {
            std::lock_guard lock(st->m);
            Slot& slot = st->slots[i];
            if (slot.done) return;
            fill_from(slot.sample, c);
            slot.done = true;
            if (c.transport_error) {
              slot.transport_failed = true;
              if (!st->transport_error) st->transport_error = c.transport_error;
            }
            --st->in_flight;
            st->cv.notify_all();
          });
      std::lock_guard lock(st->m);
      Slot& slot = st->slots[i];
      if (!slot.done) slot.sample.actual_start = std::max(intended, sent);
      slot.deadline = sent + timeout_ns;
      st->outstanding.push_back(i);
    } catch (const Error& e) {
      std::lock_guard lock(st->m);
      --st->in_flight;
      if (!st->transport_error) st->transport_error = e.what();
      break;
    }
    ++dispatched;
  }

  {
    std::unique_lock lock(st->m);
    while (st->in_flight > 0) {
      st->cv.wait_for(lock, next_wake(clock.now()));
      reap_timeouts(clock.now());
    }
  }

  Collected out;
  std::lock_guard lock(st->m);
  out.transport_error = st->transport_error;
  for (std::size_t i = 0; i < dispatched; ++i) {
    const Slot& slot = st->slots[i];
    if (slot.done && !slot.transport_failed) out.samples.push_back(slot.sample);
  }
  return out;
}

}  // namespace

TrafficModel TrafficModel::open_loop(double rate_rps, double duration_s,
                                     std::uint64_t seed,
                                     std::uint32_t batch_size) {
  TrafficModel t;
  t.mode = Mode::kOpenLoopPoisson;
  t.rate_rps = rate_rps;
  t.duration_s = duration_s;
  t.seed = seed;
  t.batch_size = batch_size;
  return t;
}

TrafficModel TrafficModel::closed_loop(std::uint32_t concurrency,
                                       std::uint64_t iterations,
                                       std::uint32_t batch_size) {
  TrafficModel t;
  t.mode = Mode::kClosedLoop;
  t.concurrency = concurrency;
  t.iterations = iterations;
  t.batch_size = batch_size;
  return t;
}

TrafficModel TrafficModel::static_batch(std::uint32_t batch_size,
                                        std::uint64_t iterations) {
  TrafficModel t;
  t.mode = Mode::kStaticBatch;
  t.batch_size = batch_size;
  t.iterations = iterations;
  return t;
}

std::string_view to_string(TrafficModel::Mode mode) {
  switch (mode) {
    case TrafficModel::Mode::kOpenLoopPoisson: return "open-loop-poisson";
    case TrafficModel::Mode::kClosedLoop: return "closed-loop";
    case TrafficModel::Mode::kStaticBatch: return "static-batch";
  }
  return "?";
}

TrafficModel::Mode traffic_mode_from_string(std::string_view text) {
  for (auto m : {TrafficModel::Mode::kOpenLoopPoisson,
                 TrafficModel::Mode::kClosedLoop,
                 TrafficModel::Mode::kStaticBatch}) {
    if (to_string(m) == text) return m;
  }
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown traffic mode '{}'", text));
}

void validate(const TrafficModel& t) {
  auto fail = [](std::string msg) {
    throw Error(ErrorCode::kInvalidArgument, std::move(msg));
  };
  if (t.batch_size < 1) fail("batch_size must be >= 1");
  if (t.iterations && *t.iterations < 1) fail("iterations must be >= 1");
  if (t.duration_s && !(*t.duration_s > 0.0)) fail("duration_s must be > 0");
  if (t.sequence_length && *t.sequence_length < 0) {
    fail("sequence_length must be >= 0");
  }
  switch (t.mode) {
    case TrafficModel::Mode::kOpenLoopPoisson:
      if (!(t.rate_rps > 0.0) || !std::isfinite(t.rate_rps)) {
        fail("rate_rps must be > 0");
      }
      if (!t.duration_s) fail("open-loop traffic needs duration_s");
      break;
    case TrafficModel::Mode::kClosedLoop:
      if (t.concurrency < 1) fail("concurrency must be >= 1");
      if (!t.iterations && !t.duration_s) {
        fail("closed-loop traffic needs iterations or duration_s");
      }
      break;
    case TrafficModel::Mode::kStaticBatch:
      if (!t.iterations) fail("static-batch traffic needs iterations");
      break;
  }
}

void validate(const RunPlan& plan) {
  validate(plan.traffic);
  for (std::size_t i = 0; i < plan.batch_sweep.size(); ++i) {
    if (plan.batch_sweep[i] < 1) {
      throw Error(ErrorCode::kInvalidArgument, "batch_sweep entries must be >= 1");
    }
    if (i > 0 && plan.batch_sweep[i] <= plan.batch_sweep[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "batch_sweep must be strictly increasing");
    }
  }
  if (plan.max_in_flight < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_in_flight must be >= 1");
  }
  if (plan.request_timeout.count() <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "request timeout must be > 0");
  }
  validate(plan.power);
  validate(plan.carbon);
}

std::vector<DurationNs> generate_arrivals(double rate_rps, double duration_s,
                                          std::uint64_t seed) {
  if (!(rate_rps > 0.0) || !(duration_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "arrival rate and duration must be > 0");
  }
  // mt19937_64 output is fixed by the standard; the uniform draw is built by
  // hand because std distributions are implementation-defined.
  std::mt19937_64 rng(seed);
  std::vector<DurationNs> offsets;
  offsets.reserve(static_cast<std::size_t>(rate_rps * duration_s * 1.1) + 16);
  double t = 0.0;
  while (true) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    t += -std::log1p(-u) / rate_rps;
    if (t >= duration_s) break;
    offsets.push_back(static_cast<DurationNs>(std::llround(t * kNsPerSecond)));
  }
  return offsets;
}

std::size_t RunRecord::error_count() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const LatencySample& s) {
        return s.outcome == Outcome::kError;
      }));
}

RunRecord execute_run(const RunPlan& plan, RunnerSession& session) {
  validate(plan);
  if (session.state() != SessionState::kReady) {
    throw Error(ErrorCode::kSessionClosed, "runner session is not ready");
  }

  RunRecord record;
  record.handshake = session.handshake();
  record.traffic = plan.traffic;
  record.warmup_iterations = plan.warmup_iterations;

  for (std::uint32_t i = 0; i < plan.warmup_iterations; ++i) {
    Attempt a = issue_and_wait(session, plan.traffic, plan.request_timeout);
    if (a.transport_error) {
      throw PartialRunError(
          fmt::format("runner failed during warmup: {}", *a.transport_error),
          std::move(record));
    }
  }

  auto power = start_sampling(plan.power, session.clock());
  Collected run;
  switch (plan.traffic.mode) {
    case TrafficModel::Mode::kOpenLoopPoisson:
      run = run_open_loop(plan, session);
      break;
    case TrafficModel::Mode::kClosedLoop:
      run = run_closed_loop(plan, session, plan.traffic.concurrency);
      break;
    case TrafficModel::Mode::kStaticBatch:
      run = run_closed_loop(plan, session, 1);
      break;
  }

  std::optional<std::string> power_error;
  try {
    record.trace = power->stop();
  } catch (const Error& e) {
    power_error = e.what();
  }

  std::sort(run.samples.begin(), run.samples.end(),
            [](const LatencySample& a, const LatencySample& b) {
              return a.request_id < b.request_id;
            });
  record.samples = std::move(run.samples);
  if (plan.traffic.sequence_length) {
    record.sequence_lengths.assign(record.samples.size(),
                                   *plan.traffic.sequence_length);
  }
  if (!record.samples.empty()) {
    record.energy_window.start = record.samples.front().intended_start;
    record.energy_window.end = record.samples.front().end;
    for (const auto& s : record.samples) {
      record.energy_window.start = std::min(record.energy_window.start, s.intended_start);
      record.energy_window.end = std::max(record.energy_window.end, s.end);
    }
  }

  if (run.transport_error) {
    record.failure = *run.transport_error;
    throw PartialRunError(
        fmt::format("runner disconnected mid-run after {} samples: {}",
                    record.samples.size(), *run.transport_error),
        std::move(record));
  }
  if (power_error) throw Error(ErrorCode::kPowerSource, *power_error);
  return record;
}

std::vector<RunRecord> run_batch_sweep(const RunPlan& plan,
                                       RunnerSession& session) {
  if (plan.batch_sweep.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "batch_sweep is empty");
  }
  validate(plan);
  std::vector<RunRecord> records;
  for (std::uint32_t batch : plan.batch_sweep) {
    RunPlan one = plan;
    one.traffic.batch_size = batch;
    one.batch_sweep.clear();
    try {
      records.push_back(execute_run(one, session));
    } catch (const PartialRunError& e) {
      RunRecord r = e.partial();
      r.failure = e.what();
      records.push_back(std::move(r));
    } catch (const Error& e) {
      RunRecord r;
      r.handshake = session.handshake();
      r.traffic = one.traffic;
      r.warmup_iterations = one.warmup_iterations;
      r.failure = e.what();
      records.push_back(std::move(r));
    }
  }
  return records;
}

}  // namespace ibench
