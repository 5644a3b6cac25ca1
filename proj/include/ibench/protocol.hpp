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

// Runner wire protocol, version 1: newline-delimited JSON, one message per
// line, UTF-8.
//
//   runner -> harness  {"type":"hello","protocol_version":1,...}   (first line)
//   harness -> runner  {"type":"hello_ack","protocol_version":1}
//   harness -> runner  {"type":"infer","id":1,"batch_size":100,...}
//   runner -> harness  {"type":"result","id":1,"status":"ok",...}
//   harness -> runner  {"type":"shutdown"}                         (exit 0)

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ibench/metrics.hpp"

namespace ibench {

inline constexpr int kProtocolVersion = 1;

enum class Precision { kFP32, kFP16, kINT8 };
enum class ItemKind { kSample, kToken, kRequest };
enum class Interconnect { kNVLink, kPCIe, kOther, kNone };
enum class MemoryType { kHBM, kGDDR, kDDR, kOther };

std::string_view to_string(Precision v);
std::string_view to_string(ItemKind v);
std::string_view to_string(Interconnect v);
std::string_view to_string(MemoryType v);

// Parsers throw ErrorCode::kInvalidArgument for unknown spellings.
Precision precision_from_string(std::string_view text);
ItemKind item_kind_from_string(std::string_view text);
Interconnect interconnect_from_string(std::string_view text);
MemoryType memory_type_from_string(std::string_view text);

ThroughputUnit throughput_unit_for(ItemKind kind);

struct DeviceAnnotations {
  std::string device_name;
  Interconnect interconnect = Interconnect::kNone;
  MemoryType memory_type = MemoryType::kOther;
  std::string power_management;

  bool operator==(const DeviceAnnotations&) const = default;
};

struct AccuracyMetadata {
  std::string metric_name;
  double value = 0.0;

  bool operator==(const AccuracyMetadata&) const = default;
};

struct Handshake {
  int protocol_version = kProtocolVersion;
  std::string model_name;
  std::string platform;
  Precision precision = Precision::kFP32;
  ItemKind item_kind = ItemKind::kSample;
  DeviceAnnotations device;
  std::optional<AccuracyMetadata> accuracy;

  bool operator==(const Handshake&) const = default;
};

struct InferRequest {
  std::uint64_t id = 0;
  std::uint32_t batch_size = 1;
  std::optional<std::int64_t> sequence_length;
  std::optional<std::string> payload_ref;

  bool operator==(const InferRequest&) const = default;
};

struct InferResponse {
  std::uint64_t id = 0;
  bool ok = true;
  std::string message;  // set when !ok
  std::uint64_t items_processed = 0;
  std::optional<std::int64_t> runner_start_ns;
  std::optional<std::int64_t> runner_end_ns;

  bool operator==(const InferResponse&) const = default;
};

enum class MessageType { kHello, kHelloAck, kInfer, kResult, kShutdown };

std::string encode(const Handshake& hello);
std::string encode(const InferRequest& request);
std::string encode(const InferResponse& response);
std::string encode_hello_ack(int version = kProtocolVersion);
std::string encode_shutdown();

/// Message type of one line. Throws ParseError(line_no) for invalid JSON or
/// a missing/unknown "type".
MessageType peek_type(std::string_view line, std::size_t line_no);

/// Each decoder throws ParseError(line_no) on malformed input. Version checks
/// are the caller's business.
Handshake decode_handshake(std::string_view line, std::size_t line_no);
int decode_hello_ack(std::string_view line, std::size_t line_no);
InferRequest decode_request(std::string_view line, std::size_t line_no);
InferResponse decode_response(std::string_view line, std::size_t line_no);

}  // namespace ibench
