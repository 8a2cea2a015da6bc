#include "ris/control/frame.hpp"

#include <algorithm>
#include <string>

#include "ris/control/crc.hpp"
#include "ris/error.hpp"

namespace ris::control {

BlockAddress::BlockAddress(unsigned value) {
  if (!valid(value)) {
    throw Error(ErrorCode::kInvalidArgument, "block address must be 0..15 or 0xFF", {{"value", value}});
  }
  value_ = static_cast<std::uint8_t>(value);
}

BlockAddress BlockAddress::from_switches(bool b3, bool b2, bool b1, bool b0) {
  return BlockAddress((b3 ? 8U : 0U) + (b2 ? 4U : 0U) + (b1 ? 2U : 0U) + (b0 ? 1U : 0U));
}

std::optional<Opcode> opcode_from_byte(std::uint8_t byte) {
  if (byte >= 0x01 && byte <= 0x06) return static_cast<Opcode>(byte);
  return std::nullopt;
}

std::optional<Opcode> opcode_from_string(std::string_view name) {
  for (std::uint8_t b = 0x01; b <= 0x06; ++b) {
    if (to_string(static_cast<Opcode>(b)) == name) return static_cast<Opcode>(b);
  }
  return std::nullopt;
}

std::string_view to_string(Opcode op) {
  switch (op) {
    case Opcode::kSetConfig: return "SET_CONFIG";
    case Opcode::kGetStatus: return "GET_STATUS";
    case Opcode::kStatusReply: return "STATUS_REPLY";
    case Opcode::kPing: return "PING";
    case Opcode::kPong: return "PONG";
    case Opcode::kReset: return "RESET";
  }
  return "UNKNOWN";
}

std::size_t payload_size(Opcode op) {
  switch (op) {
    case Opcode::kSetConfig: return 8;
    case Opcode::kStatusReply: return 11;
    case Opcode::kPong: return 2;
    case Opcode::kGetStatus:
    case Opcode::kPing:
    case Opcode::kReset: return 0;
  }
  return 0;
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  if (frame.payload.size() > kMaxPayload) {
    throw Error(ErrorCode::kInvalidArgument, "payload exceeds 64 bytes", {{"length", frame.payload.size()}});
  }
  if (frame.payload.size() != payload_size(frame.opcode)) {
    throw Error(ErrorCode::kInvalidArgument, "payload length does not match opcode",
                {{"opcode", std::string(to_string(frame.opcode))},
                 {"length", frame.payload.size()},
                 {"expected", payload_size(frame.opcode)}});
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + frame.payload.size() + kCrcSize);
  out.push_back(kStartOfFrame);
  out.push_back(frame.version);
  out.push_back(frame.dest.value());
  out.push_back(static_cast<std::uint8_t>(frame.opcode));
  out.push_back(static_cast<std::uint8_t>(frame.payload.size()));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  const std::uint16_t crc = crc16(std::span(out).subspan(1));
  out.push_back(static_cast<std::uint8_t>(crc >> 8));
  out.push_back(static_cast<std::uint8_t>(crc & 0xFF));
  return out;
}

DecodeResult decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return DecodeError::kTruncated;
  if (bytes[0] != kStartOfFrame) return DecodeError::kBadSof;
  if (bytes.size() < kHeaderSize) return DecodeError::kTruncated;
  const std::size_t length = bytes[4];
  if (length > kMaxPayload) return DecodeError::kBadLength;
  const std::size_t total = kHeaderSize + length + kCrcSize;
  if (bytes.size() < total) return DecodeError::kTruncated;
  if (bytes.size() > total) return DecodeError::kBadLength;

  const std::uint16_t expected = crc16(bytes.subspan(1, kHeaderSize - 1 + length));
  const std::uint16_t got = static_cast<std::uint16_t>(bytes[total - 2] << 8 | bytes[total - 1]);
  if (expected != got) return DecodeError::kBadCrc;

  const auto op = opcode_from_byte(bytes[3]);
  if (!op) return DecodeError::kBadOpcode;
  if (length != payload_size(*op)) return DecodeError::kBadLength;
  if (!BlockAddress::valid(bytes[2])) return DecodeError::kBadAddress;

  Frame f;
  f.version = bytes[1];
  f.dest = BlockAddress(bytes[2]);
  f.opcode = *op;
  f.payload.assign(bytes.begin() + kHeaderSize, bytes.begin() + static_cast<std::ptrdiff_t>(kHeaderSize + length));
  return f;
}

std::string_view to_string(DecodeError e) {
  switch (e) {
    case DecodeError::kBadSof: return "BAD_SOF";
    case DecodeError::kTruncated: return "TRUNCATED";
    case DecodeError::kBadLength: return "BAD_LENGTH";
    case DecodeError::kBadCrc: return "BAD_CRC";
    case DecodeError::kBadOpcode: return "BAD_OPCODE";
    case DecodeError::kBadAddress: return "BAD_ADDRESS";
  }
  return "UNKNOWN";
}

std::string_view to_string(BlockMode mode) { return mode == BlockMode::kMaster ? "master" : "slave"; }

std::string_view to_string(StatusCode code) {
  switch (code) {
    case StatusCode::kOk: return "OK";
    case StatusCode::kBadSof: return "BAD_SOF";
    case StatusCode::kTruncated: return "TRUNCATED";
    case StatusCode::kBadLength: return "BAD_LENGTH";
    case StatusCode::kBadCrc: return "BAD_CRC";
    case StatusCode::kBadOpcode: return "BAD_OPCODE";
    case StatusCode::kBadAddress: return "BAD_ADDRESS";
    case StatusCode::kModeViolation: return "MODE_VIOLATION";
    case StatusCode::kAddressConflict: return "ADDRESS_CONFLICT";
    case StatusCode::kTimeout: return "TIMEOUT";
    case StatusCode::kUnpowered: return "UNPOWERED";
  }
  return "UNKNOWN";
}

StatusCode to_status(DecodeError e) {
  switch (e) {
    case DecodeError::kBadSof: return StatusCode::kBadSof;
    case DecodeError::kTruncated: return StatusCode::kTruncated;
    case DecodeError::kBadLength: return StatusCode::kBadLength;
    case DecodeError::kBadCrc: return StatusCode::kBadCrc;
    case DecodeError::kBadOpcode: return StatusCode::kBadOpcode;
    case DecodeError::kBadAddress: return StatusCode::kBadAddress;
  }
  return StatusCode::kBadLength;
}

Frame make_set_config(BlockAddress dest, const BlockPayload& surface) {
  return {kProtocolVersion, dest, Opcode::kSetConfig, {surface.begin(), surface.end()}};
}

Frame make_get_status(BlockAddress dest) { return {kProtocolVersion, dest, Opcode::kGetStatus, {}}; }
Frame make_ping(BlockAddress dest) { return {kProtocolVersion, dest, Opcode::kPing, {}}; }
Frame make_reset(BlockAddress dest) { return {kProtocolVersion, dest, Opcode::kReset, {}}; }

Frame make_status_reply(const StatusReply& reply) {
  Frame f{kProtocolVersion, BlockAddress::broadcast(), Opcode::kStatusReply, {}};
  f.payload.reserve(payload_size(Opcode::kStatusReply));
  f.payload.push_back(reply.source.value());
  f.payload.push_back(static_cast<std::uint8_t>(reply.status));
  f.payload.push_back(reply.powered ? 1 : 0);
  for (std::uint8_t b : reply.surface) f.payload.push_back(b);
  return f;
}

Frame make_pong(const Pong& pong) {
  return {kProtocolVersion, BlockAddress::broadcast(), Opcode::kPong,
          {pong.source.value(), static_cast<std::uint8_t>(pong.mode)}};
}

std::optional<StatusReply> parse_status_reply(const Frame& frame) {
  if (frame.opcode != Opcode::kStatusReply || frame.payload.size() != payload_size(Opcode::kStatusReply)) {
    return std::nullopt;
  }
  if (!BlockAddress::valid(frame.payload[0]) || frame.payload[1] > static_cast<std::uint8_t>(StatusCode::kUnpowered)) {
    return std::nullopt;
  }
  StatusReply r;
  r.source = BlockAddress(frame.payload[0]);
  r.status = static_cast<StatusCode>(frame.payload[1]);
  r.powered = frame.payload[2] != 0;
  std::copy(frame.payload.begin() + 3, frame.payload.end(), r.surface.begin());
  return r;
}

std::optional<Pong> parse_pong(const Frame& frame) {
  if (frame.opcode != Opcode::kPong || frame.payload.size() != 2) return std::nullopt;
  if (!BlockAddress::valid(frame.payload[0]) || frame.payload[1] > 1) return std::nullopt;
  return Pong{BlockAddress(frame.payload[0]), static_cast<BlockMode>(frame.payload[1])};
}

BlockPayload set_config_surface(const Frame& frame) {
  if (frame.opcode != Opcode::kSetConfig || frame.payload.size() != 8) {
    throw Error(ErrorCode::kInvalidArgument, "not a SET_CONFIG frame");
  }
  BlockPayload out{};
  std::copy(frame.payload.begin(), frame.payload.end(), out.begin());
  return out;
}

}  // namespace ris::control
