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

#include "ibench/session.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <future>

#include <fmt/format.h>

#include "ibench/error.hpp"

namespace ibench {

namespace {

UniqueFd connect_tcp(const TcpTransport& endpoint,
                     std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string port = std::to_string(endpoint.port);
  const int rc = ::getaddrinfo(endpoint.host.c_str(), port.c_str(), &hints, &found);
  if (rc != 0) {
    throw Error(ErrorCode::kSpawn, fmt::format("cannot resolve '{}': {}",
                                               endpoint.host, gai_strerror(rc)));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found,
                                                             &::freeaddrinfo);

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::string last_error = "no addresses";
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    UniqueFd fd(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC,
                         ai->ai_protocol));
    if (!fd.valid()) continue;
    const int flags = ::fcntl(fd.get(), F_GETFL);
    ::fcntl(fd.get(), F_SETFL, flags | O_NONBLOCK);
    if (::connect(fd.get(), ai->ai_addr, ai->ai_addrlen) != 0) {
      if (errno != EINPROGRESS) {
        last_error = std::strerror(errno);
        continue;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      pollfd pfd{fd.get(), POLLOUT, 0};
      if (::poll(&pfd, 1, static_cast<int>(std::max<long>(0, left.count()))) <= 0) {
        throw Error(ErrorCode::kTimeout,
                    fmt::format("connect to {}:{} timed out after {} ms",
                                endpoint.host, endpoint.port, timeout.count()));
      }
      int err = 0;
      socklen_t len = sizeof(err);
      ::getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &len);
      if (err != 0) {
        last_error = std::strerror(err);
        continue;
      }
    }
    ::fcntl(fd.get(), F_SETFL, flags);
    int one = 1;
    ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return fd;
  }
  throw Error(ErrorCode::kSpawn, fmt::format("cannot connect to {}:{}: {}",
                                             endpoint.host, endpoint.port,
                                             last_error));
}

}  // namespace

std::string describe(const TransportConfig& transport) {
  if (const auto* c = std::get_if<CommandTransport>(&transport)) {
    std::string cmd;
    for (const auto& a : c->argv) {
      if (!cmd.empty()) cmd += ' ';
      cmd += a;
    }
    return fmt::format("stdio:{}", cmd);
  }
  if (const auto* t = std::get_if<TcpTransport>(&transport)) {
    return fmt::format("tcp:{}:{}", t->host, t->port);
  }
  return "in-process";
}

TcpTransport parse_tcp_endpoint(std::string_view endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("expected host:port, got '{}'", endpoint));
  }
  TcpTransport t;
  t.host = std::string(endpoint.substr(0, colon));
  const auto port_text = endpoint.substr(colon + 1);
  unsigned port = 0;
  auto [ptr, ec] =
      std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() ||
      port == 0 || port > 65535) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("invalid port in '{}'", endpoint));
  }
  t.port = static_cast<std::uint16_t>(port);
  return t;
}

RunnerSession::RunnerSession(const Clock& clock, SessionOptions options)
    : clock_(clock), options_(options) {}

std::unique_ptr<RunnerSession> RunnerSession::open(TransportConfig transport,
                                                   const Clock& clock,
                                                   SessionOptions options) {
  ignore_sigpipe();
  std::unique_ptr<RunnerSession> s(new RunnerSession(clock, options));

  if (auto* c = std::get_if<CommandTransport>(&transport)) {
    s->child_.emplace(Subprocess::spawn(c->argv));
    s->write_fd_ = s->child_->take_stdin();
    s->read_fd_ = s->child_->take_stdout();
  } else if (auto* t = std::get_if<TcpTransport>(&transport)) {
    s->read_fd_ = connect_tcp(*t, options.connect_timeout);
    s->write_fd_ = UniqueFd(::fcntl(s->read_fd_.get(), F_DUPFD_CLOEXEC, 0));
    s->is_socket_ = true;
  } else {
    auto& connected = std::get<ConnectedTransport>(transport);
    if (!connected.fd || !connected.fd->valid()) {
      throw Error(ErrorCode::kInvalidArgument, "connected transport has no fd");
    }
    s->shared_fd_ = connected.fd;
    s->read_fd_ = UniqueFd(::fcntl(connected.fd->get(), F_DUPFD_CLOEXEC, 0));
    s->write_fd_ = UniqueFd(::fcntl(connected.fd->get(), F_DUPFD_CLOEXEC, 0));
    s->is_socket_ = true;
  }
  s->reader_ = std::make_unique<LineReader>(s->read_fd_.get());

  std::optional<std::string> hello;
  try {
    hello = s->reader_->read_line(options.connect_timeout);
  } catch (const Error& e) {
    throw Error(ErrorCode::kTimeout,
                fmt::format("no hello from runner within {} ms",
                            options.connect_timeout.count()));
  }
  if (!hello) {
    std::string status;
    if (s->child_) {
      if (auto st = s->child_->wait_for(std::chrono::milliseconds(1000))) {
        status = fmt::format(" ({})", st->describe());
      }
    }
    throw Error(ErrorCode::kHandshake,
                fmt::format("runner closed the connection before its hello{}",
                            status));
  }
  s->lines_read_ = 1;
  s->note("< " + *hello);

  s->handshake_ = decode_handshake(*hello, 1);
  if (s->handshake_.protocol_version != kProtocolVersion) {
    throw Error(ErrorCode::kHandshake,
                fmt::format("runner speaks protocol version {}, harness "
                            "supports version {}",
                            s->handshake_.protocol_version, kProtocolVersion));
  }
  s->send_line(encode_hello_ack());
  s->state_ = SessionState::kReady;
  s->reader_thread_ = std::thread([raw = s.get()] { raw->reader_loop(); });
  return s;
}

RunnerSession::~RunnerSession() {
  try {
    close(std::chrono::milliseconds(1000));
  } catch (...) {
  }
  if (reader_thread_.joinable()) reader_thread_.join();
}

void RunnerSession::send_line(const std::string& line) {
  std::lock_guard lock(write_mutex_);
  if (!write_all(write_fd_.get(), line + "\n")) {
    throw Error(ErrorCode::kSessionClosed, "runner connection is closed");
  }
  note("> " + line);
}

TimestampNs RunnerSession::submit(const InferRequest& request,
                                  Callback on_done) {
  std::string line = encode(request);
  line += '\n';

  std::lock_guard write_lock(write_mutex_);
  TimestampNs sent = 0;
  {
    std::lock_guard lock(mutex_);
    if (state_ != SessionState::kReady) {
      throw Error(ErrorCode::kSessionClosed,
                  fmt::format("cannot send request {}: session is closed",
                              request.id));
    }
    if (pending_.count(request.id) != 0) {
      throw Error(ErrorCode::kProtocol,
                  fmt::format("request id {} is already in flight", request.id));
    }
    sent = clock_.now();
    pending_.emplace(request.id, std::make_pair(sent, std::move(on_done)));
  }
  if (!write_all(write_fd_.get(), line)) {
    std::lock_guard lock(mutex_);
    // The reader may already have failed this request on EOF.
    if (pending_.erase(request.id) != 0) {
      throw Error(ErrorCode::kSessionClosed,
                  fmt::format("runner connection closed while sending request {}",
                              request.id));
    }
    return sent;
  }
  line.pop_back();
  note("> " + line);
  return sent;
}

bool RunnerSession::cancel(std::uint64_t id) {
  std::lock_guard lock(mutex_);
  if (pending_.erase(id) == 0) return false;
  cancelled_.insert(id);
  return true;
}

Completion RunnerSession::infer(const InferRequest& request,
                                std::chrono::milliseconds timeout) {
  auto promise = std::make_shared<std::promise<Completion>>();
  auto future = promise->get_future();
  submit(request, [promise](const Completion& c) { promise->set_value(c); });
  if (future.wait_for(timeout) == std::future_status::timeout &&
      cancel(request.id)) {
    throw Error(ErrorCode::kTimeout,
                fmt::format("request {} got no result within {} ms", request.id,
                            timeout.count()));
  }
  Completion c = future.get();
  if (c.transport_error) throw Error(ErrorCode::kSessionClosed, *c.transport_error);
  return c;
}

void RunnerSession::reader_loop() {
  while (true) {
    std::optional<std::string> line;
    try {
      line = reader_->read_line();
    } catch (const Error&) {
      break;
    }
    if (!line) break;
    const TimestampNs end = clock_.now();
    const std::size_t line_no = ++lines_read_;
    note("< " + *line);

    InferResponse response;
    try {
      response = decode_response(*line, line_no);
    } catch (const ParseError& e) {
      violation(e.what());
      continue;
    }

    Callback callback;
    TimestampNs sent = 0;
    {
      std::lock_guard lock(mutex_);
      auto it = pending_.find(response.id);
      if (it != pending_.end()) {
        sent = it->second.first;
        callback = std::move(it->second.second);
        pending_.erase(it);
      } else if (cancelled_.erase(response.id) == 0) {
        violations_.push_back(fmt::format(
            "line {}: result for unknown request id {}", line_no, response.id));
        continue;
      }
    }
    if (callback) {
      Completion c;
      c.response = std::move(response);
      c.actual_start = sent;
      c.end = end;
      callback(c);
    }
  }

  const std::string why = "runner closed the connection";
  {
    std::lock_guard lock(mutex_);
    eof_ = true;
    state_ = SessionState::kClosed;
  }
  eof_cv_.notify_all();
  fail_pending(why);
}

void RunnerSession::fail_pending(const std::string& why) {
  std::unordered_map<std::uint64_t, std::pair<TimestampNs, Callback>> orphans;
  {
    std::lock_guard lock(mutex_);
    orphans.swap(pending_);
  }
  const TimestampNs now = clock_.now();
  for (auto& [id, entry] : orphans) {
    Completion c;
    c.response.id = id;
    c.response.ok = false;
    c.response.message = why;
    c.actual_start = entry.first;
    c.end = std::max(now, entry.first);
    c.transport_error = why;
    entry.second(c);
  }
}

std::optional<ExitStatus> RunnerSession::close(
    std::chrono::milliseconds timeout) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) return exit_status_;
    closed_ = true;
  }
  const bool was_ready = state_.exchange(SessionState::kClosed) == SessionState::kReady;
  if (was_ready) {
    std::lock_guard lock(write_mutex_);
    if (write_all(write_fd_.get(), encode_shutdown() + "\n")) {
      note("> " + encode_shutdown());
    }
  }

  if (child_) {
    {
      std::lock_guard lock(write_mutex_);
      write_fd_.reset();
    }
    exit_status_ = child_->wait_for(timeout);
    peer_closed_ = exit_status_.has_value();
    if (!exit_status_) {
      child_->kill();
      exit_status_ = child_->exit_status();
    }
  } else if (is_socket_) {
    {
      std::unique_lock lock(mutex_);
      if (reader_thread_.joinable()) {
        eof_cv_.wait_for(lock, timeout, [this] { return eof_; });
      }
      peer_closed_ = eof_;
    }
    ::shutdown(read_fd_.get(), SHUT_RDWR);
  }
  if (reader_thread_.joinable() &&
      reader_thread_.get_id() != std::this_thread::get_id()) {
    reader_thread_.join();
  }
  fail_pending("session closed");
  return exit_status_;
}

void RunnerSession::note(std::string line) {
  std::lock_guard lock(mutex_);
  transcript_.push_back(std::move(line));
  while (transcript_.size() > options_.transcript_limit) transcript_.pop_front();
}

void RunnerSession::violation(std::string what) {
  std::lock_guard lock(mutex_);
  violations_.push_back(std::move(what));
}

std::vector<std::string> RunnerSession::violations() const {
  std::lock_guard lock(mutex_);
  return violations_;
}

std::vector<std::string> RunnerSession::transcript() const {
  std::lock_guard lock(mutex_);
  return {transcript_.begin(), transcript_.end()};
}

bool RunnerSession::peer_closed() const {
  std::lock_guard lock(mutex_);
  return peer_closed_;
}

std::size_t RunnerSession::in_flight() const {
  std::lock_guard lock(mutex_);
  return pending_.size();
}

}  // namespace ibench
