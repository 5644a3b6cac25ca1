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

#include "ibench/protocol.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <type_traits>
#include <utility>

#include <fmt/format.h>
#include <json.hpp>

#include "ibench/error.hpp"

namespace ibench {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename Enum, std::size_t N>
Enum from_table(const std::array<std::pair<Enum, std::string_view>, N>& table,
                std::string_view text, std::string_view what) {
  for (const auto& [value, name] : table) {
    if (name == text) return value;
  }
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown {} '{}'", what, text));
}

template <typename Enum, std::size_t N>
std::string_view to_table(
    const std::array<std::pair<Enum, std::string_view>, N>& table, Enum v) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "?";
}

constexpr std::array<std::pair<Precision, std::string_view>, 3> kPrecisions{{
    {Precision::kFP32, "FP32"},
    {Precision::kFP16, "FP16"},
    {Precision::kINT8, "INT8"},
}};
constexpr std::array<std::pair<ItemKind, std::string_view>, 3> kItemKinds{{
    {ItemKind::kSample, "sample"},
    {ItemKind::kToken, "token"},
    {ItemKind::kRequest, "request"},
}};
constexpr std::array<std::pair<Interconnect, std::string_view>, 4>
    kInterconnects{{
        {Interconnect::kNVLink, "NVLink"},
        {Interconnect::kPCIe, "PCIe"},
        {Interconnect::kOther, "other"},
        {Interconnect::kNone, "none"},
    }};
constexpr std::array<std::pair<MemoryType, std::string_view>, 4> kMemoryTypes{{
    {MemoryType::kHBM, "HBM"},
    {MemoryType::kGDDR, "GDDR"},
    {MemoryType::kDDR, "DDR"},
    {MemoryType::kOther, "other"},
}};

json parse_object(std::string_view line, std::size_t line_no) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ParseError(line_no, "invalid JSON");
  if (!j.is_object()) throw ParseError(line_no, "message is not a JSON object");
  return j;
}

/// Reads a required field, turning JSON type errors into ParseError.
template <typename T>
T field(const json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(line_no, fmt::format("missing field '{}'", key));
  }
  if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
    // get<T>() would silently convert negatives and fractions.
    const bool integral = std::is_unsigned_v<T> ? it->is_number_unsigned()
                                                : it->is_number_integer();
    if (!integral) {
      throw ParseError(line_no, fmt::format("field '{}' must be {} integer", key,
                                            std::is_unsigned_v<T> ? "a non-negative"
                                                                  : "an"));
    }
    if constexpr (std::is_unsigned_v<T>) {
      if (it->template get<std::uint64_t>() > std::numeric_limits<T>::max()) {
        throw ParseError(line_no, fmt::format("field '{}' is out of range", key));
      }
    }
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(line_no, fmt::format("field '{}' has the wrong type", key));
  }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key,
                                std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return field<T>(j, key, line_no);
}

template <typename Enum, std::size_t N>
Enum enum_field(const json& j, const char* key, std::size_t line_no,
                const std::array<std::pair<Enum, std::string_view>, N>& table) {
  const auto text = field<std::string>(j, key, line_no);
  try {
    return from_table(table, text, key);
  } catch (const Error& e) {
    throw ParseError(line_no, e.what());
  }
}

void expect_type(const json& j, std::string_view type, std::size_t line_no) {
  const auto actual = field<std::string>(j, "type", line_no);
  if (actual != type) {
    throw ParseError(line_no, fmt::format("expected message type '{}', got '{}'",
                                          type, actual));
  }
}

}  // namespace

std::string_view to_string(Precision v) { return to_table(kPrecisions, v); }
std::string_view to_string(ItemKind v) { return to_table(kItemKinds, v); }
std::string_view to_string(Interconnect v) { return to_table(kInterconnects, v); }
std::string_view to_string(MemoryType v) { return to_table(kMemoryTypes, v); }

Precision precision_from_string(std::string_view text) {
  return from_table(kPrecisions, text, "precision");
}
ItemKind item_kind_from_string(std::string_view text) {
  return from_table(kItemKinds, text, "item_kind");
}
Interconnect interconnect_from_string(std::string_view text) {
  return from_table(kInterconnects, text, "interconnect");
}
MemoryType memory_type_from_string(std::string_view text) {
  return from_table(kMemoryTypes, text, "memory_type");
}

ThroughputUnit throughput_unit_for(ItemKind kind) {
  switch (kind) {
    case ItemKind::kSample: return ThroughputUnit::kSamples;
    case ItemKind::kToken: return ThroughputUnit::kTokens;
    case ItemKind::kRequest: return ThroughputUnit::kRequests;
  }
  return ThroughputUnit::kSamples;
}

std::string encode(const Handshake& hello) {
  ordered_json j;
  j["type"] = "hello";
  j["protocol_version"] = hello.protocol_version;
  j["model_name"] = hello.model_name;
  j["platform"] = hello.platform;
  j["precision"] = to_string(hello.precision);
  j["item_kind"] = to_string(hello.item_kind);
  j["device"] = {
      {"device_name", hello.device.device_name},
      {"interconnect", to_string(hello.device.interconnect)},
      {"memory_type", to_string(hello.device.memory_type)},
      {"power_management", hello.device.power_management},
  };
  if (hello.accuracy) {
    j["accuracy"] = {{"metric_name", hello.accuracy->metric_name},
                     {"value", hello.accuracy->value}};
  }
  return j.dump();
}

std::string encode(const InferRequest& request) {
  ordered_json j;
  j["type"] = "infer";
  j["id"] = request.id;
  j["batch_size"] = request.batch_size;
  if (request.sequence_length) j["sequence_length"] = *request.sequence_length;
  if (request.payload_ref) j["payload_ref"] = *request.payload_ref;
  return j.dump();
}

std::string encode(const InferResponse& response) {
  ordered_json j;
  j["type"] = "result";
  j["id"] = response.id;
  if (response.ok) {
    j["status"] = "ok";
    j["items_processed"] = response.items_processed;
  } else {
    j["status"] = "error";
    j["message"] = response.message;
  }
  if (response.runner_start_ns) j["runner_start_ns"] = *response.runner_start_ns;
  if (response.runner_end_ns) j["runner_end_ns"] = *response.runner_end_ns;
  return j.dump();
}

std::string encode_hello_ack(int version) {
  ordered_json j;
  j["type"] = "hello_ack";
  j["protocol_version"] = version;
  return j.dump();
}

std::string encode_shutdown() { return R"({"type":"shutdown"})"; }

MessageType peek_type(std::string_view line, std::size_t line_no) {
  const json j = parse_object(line, line_no);
  const auto type = field<std::string>(j, "type", line_no);
  if (type == "hello") return MessageType::kHello;
  if (type == "hello_ack") return MessageType::kHelloAck;
  if (type == "infer") return MessageType::kInfer;
  if (type == "result") return MessageType::kResult;
  if (type == "shutdown") return MessageType::kShutdown;
  throw ParseError(line_no, fmt::format("unknown message type '{}'", type));
}

Handshake decode_handshake(std::string_view line, std::size_t line_no) {
  const json j = parse_object(line, line_no);
  expect_type(j, "hello", line_no);
  Handshake h;
  h.protocol_version = field<int>(j, "protocol_version", line_no);
  h.model_name = field<std::string>(j, "model_name", line_no);
  h.platform = field<std::string>(j, "platform", line_no);
  h.precision = enum_field(j, "precision", line_no, kPrecisions);
  h.item_kind = enum_field(j, "item_kind", line_no, kItemKinds);

  const auto device = j.find("device");
  if (device == j.end() || !device->is_object()) {
    throw ParseError(line_no, "missing object 'device'");
  }
  h.device.device_name = field<std::string>(*device, "device_name", line_no);
  h.device.interconnect =
      enum_field(*device, "interconnect", line_no, kInterconnects);
  h.device.memory_type = enum_field(*device, "memory_type", line_no, kMemoryTypes);
  h.device.power_management =
      field<std::string>(*device, "power_management", line_no);

  const auto accuracy = j.find("accuracy");
  if (accuracy != j.end() && !accuracy->is_null()) {
    if (!accuracy->is_object()) {
      throw ParseError(line_no, "'accuracy' must be an object");
    }
    h.accuracy = AccuracyMetadata{
        field<std::string>(*accuracy, "metric_name", line_no),
        field<double>(*accuracy, "value", line_no)};
  }
  return h;
}

int decode_hello_ack(std::string_view line, std::size_t line_no) {
  const json j = parse_object(line, line_no);
  expect_type(j, "hello_ack", line_no);
  return field<int>(j, "protocol_version", line_no);
}

InferRequest decode_request(std::string_view line, std::size_t line_no) {
  const json j = parse_object(line, line_no);
  expect_type(j, "infer", line_no);
  InferRequest r;
  r.id = field<std::uint64_t>(j, "id", line_no);
  r.batch_size = field<std::uint32_t>(j, "batch_size", line_no);
  r.sequence_length = optional_field<std::int64_t>(j, "sequence_length", line_no);
  r.payload_ref = optional_field<std::string>(j, "payload_ref", line_no);
  return r;
}

InferResponse decode_response(std::string_view line, std::size_t line_no) {
  const json j = parse_object(line, line_no);
  expect_type(j, "result", line_no);
  InferResponse r;
  r.id = field<std::uint64_t>(j, "id", line_no);
  const auto status = field<std::string>(j, "status", line_no);
  if (status == "ok") {
    r.ok = true;
    r.items_processed = field<std::uint64_t>(j, "items_processed", line_no);
  } else if (status == "error") {
    r.ok = false;
    r.message = optional_field<std::string>(j, "message", line_no).value_or("");
    r.items_processed =
        optional_field<std::uint64_t>(j, "items_processed", line_no).value_or(0);
  } else {
    throw ParseError(line_no, fmt::format("unknown status '{}'", status));
  }
  r.runner_start_ns = optional_field<std::int64_t>(j, "runner_start_ns", line_no);
  r.runner_end_ns = optional_field<std::int64_t>(j, "runner_end_ns", line_no);
  return r;
}

}  // namespace ibench
