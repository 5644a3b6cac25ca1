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

// Scriptable runner process for transport, conformance and CLI tests.
//
//   ibench_fake_runner --delay-ms 10 [--per-item-ms 0.1]
//                      [--transport stdio|tcp:<port>] [--port-file <path>]
//                      [--fault wrong-ids|malformed-hello|version2|
//                               exit-after=<n>|error-batch=<b>|error-every=<n>|
//                               ignore-shutdown]

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fake_runner.hpp"

using ibench::testing::FakeRunnerSpec;

namespace {

void apply_fault(FakeRunnerSpec& spec, const std::string& fault) {
  if (fault == "wrong-ids") {
    spec.wrong_ids = true;
  } else if (fault == "malformed-hello") {
    spec.malformed_hello = true;
  } else if (fault == "version2") {
    spec.hello.protocol_version = 2;
  } else if (fault == "ignore-shutdown") {
    spec.ignore_shutdown = true;
  } else if (fault.rfind("exit-after=", 0) == 0) {
    spec.exit_after = std::stoul(fault.substr(11));
  } else if (fault.rfind("error-every=", 0) == 0) {
    spec.error_every = std::stoul(fault.substr(12));
  } else if (fault.rfind("error-batch=", 0) == 0) {
    spec.error_batch_size = static_cast<std::uint32_t>(std::stoul(fault.substr(12)));
  } else {
    throw CLI::ValidationError("--fault", "unknown fault '" + fault + "'");
  }
}

int serve_tcp(const FakeRunnerSpec& spec, int port, const std::string& port_file) {
  int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  int one = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listener, 1) != 0) {
    std::perror("bind/listen");
    return 1;
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  if (!port_file.empty()) {
    // Written to a temp name and renamed so readers never see a partial file.
    std::ofstream(port_file + ".tmp") << ntohs(addr.sin_port) << "\n";
    std::rename((port_file + ".tmp").c_str(), port_file.c_str());
  }
  const int conn = ::accept(listener, nullptr, nullptr);
  ::close(listener);
  if (conn < 0) return 1;
  const int rc = ibench::testing::serve(spec, conn, conn);
  ::close(conn);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic-delay inference runner for tests"};
  FakeRunnerSpec spec;
  std::string transport = "stdio";
  std::string port_file;
  std::vector<std::string> faults;
  std::string precision = "FP16";
  std::string item_kind = "sample";
  std::string interconnect = "PCIe";
  std::string memory_type = "GDDR";
  double accuracy = -1.0;

  app.add_option("--delay-ms", spec.base_delay_ms);
  app.add_option("--per-item-ms", spec.per_item_ms);
  app.add_option("--reorder-window", spec.reorder_window);
  app.add_option("--tokens-per-request", spec.tokens_per_request);
  app.add_option("--model", spec.hello.model_name);
  app.add_option("--platform", spec.hello.platform);
  app.add_option("--precision", precision);
  app.add_option("--item-kind", item_kind);
  app.add_option("--device", spec.hello.device.device_name);
  app.add_option("--interconnect", interconnect);
  app.add_option("--memory-type", memory_type);
  app.add_option("--accuracy", accuracy, "top-1 accuracy to declare");
  app.add_option("--transport", transport);
  app.add_option("--port-file", port_file);
  app.add_option("--fault", faults);
  CLI11_PARSE(app, argc, argv);

  try {
    spec.hello.precision = ibench::precision_from_string(precision);
    spec.hello.item_kind = ibench::item_kind_from_string(item_kind);
    spec.hello.device.interconnect = ibench::interconnect_from_string(interconnect);
    spec.hello.device.memory_type = ibench::memory_type_from_string(memory_type);
    if (accuracy >= 0.0) spec.hello.accuracy = {"top1", accuracy};
    for (const auto& f : faults) apply_fault(spec, f);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 64;
  }

  if (transport == "stdio") {
    const int code = ibench::testing::serve(spec, STDIN_FILENO, STDOUT_FILENO);
    // A runner that ignores shutdown also outlives its closed stdin.
    if (spec.ignore_shutdown) {
      while (true) ::pause();
    }
    return code;
  }
  if (transport.rfind("tcp:", 0) == 0) {
    return serve_tcp(spec, std::stoi(transport.substr(4)), port_file);
  }
  std::cerr << "unknown transport '" << transport << "'\n";
  return 64;
}
