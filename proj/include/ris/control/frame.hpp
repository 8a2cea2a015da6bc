#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace ris::control {

// Wire layout: [0xA5, version, dest, opcode, length, payload..., crc_hi, crc_lo]
// with the CRC taken over version..payload.
inline constexpr std::uint8_t kStartOfFrame = 0xA5;
inline constexpr std::uint8_t kProtocolVersion = 0x01;
inline constexpr std::size_t kMaxPayload = 64;
inline constexpr std::size_t kHeaderSize = 5;
inline constexpr std::size_t kCrcSize = 2;

/// 4-bit block address set by the address switches, or broadcast (0xFF).
class BlockAddress {
 public:
  static constexpr std::uint8_t kBroadcastValue = 0xFF;
  static constexpr std::uint8_t kMaxUnicast = 0x0F;

  constexpr BlockAddress() = default;
  explicit BlockAddress(unsigned value);

  static BlockAddress broadcast() { return BlockAddress(kBroadcastValue); }
  static BlockAddress from_switches(bool b3, bool b2, bool b1, bool b0);
  static bool valid(unsigned value) { return value <= kMaxUnicast || value == kBroadcastValue; }

  std::uint8_t value() const { return value_; }
  bool is_broadcast() const { return value_ == kBroadcastValue; }

  auto operator<=>(const BlockAddress&) const = default;

 private:
  std::uint8_t value_ = 0;
};

enum class Opcode : std::uint8_t {
  kSetConfig = 0x01,
  kGetStatus = 0x02,
  kStatusReply = 0x03,
  kPing = 0x04,
  kPong = 0x05,
  kReset = 0x06,
};

std::optional<Opcode> opcode_from_byte(std::uint8_t byte);
std::optional<Opcode> opcode_from_string(std::string_view name);
std::string_view to_string(Opcode op);
std::size_t payload_size(Opcode op);

struct Frame {
  std::uint8_t version = kProtocolVersion;
  BlockAddress dest;
  Opcode opcode = Opcode::kPing;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Throws ris::Error for oversized payloads or a payload length that does
/// not fit the opcode.
std::vector<std::uint8_t> encode_frame(const Frame& frame);

enum class DecodeError {
  kBadSof,
  kTruncated,
  kBadLength,  // length field > 64, trailing bytes, or wrong size for the opcode
  kBadCrc,
  kBadOpcode,
  kBadAddress,
};

std::string_view to_string(DecodeError e);

using DecodeResult = std::variant<Frame, DecodeError>;

/// Accepts arbitrary bytes; the input must hold exactly one frame.
DecodeResult decode_frame(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// Payload schemas

enum class BlockMode : std::uint8_t { kMaster = 0, kSlave = 1 };
std::string_view to_string(BlockMode mode);

enum class StatusCode : std::uint8_t {
  kOk = 0,
  kBadSof = 1,
  kTruncated = 2,
  kBadLength = 3,
  kBadCrc = 4,
  kBadOpcode = 5,
  kBadAddress = 6,
  kModeViolation = 7,
  kAddressConflict = 8,
  kTimeout = 9,
  kUnpowered = 10,
};

std::string_view to_string(StatusCode code);
StatusCode to_status(DecodeError e);

/// 8x8 surface bits, row-major, MSB-first within each byte, 1 = PIN ON.
using BlockPayload = std::array<std::uint8_t, 8>;

struct StatusReply {
  BlockAddress source;
  StatusCode status = StatusCode::kOk;
  bool powered = true;
  BlockPayload surface{};

  friend bool operator==(const StatusReply&, const StatusReply&) = default;
};

struct Pong {
  BlockAddress source;
  BlockMode mode = BlockMode::kSlave;
};

Frame make_set_config(BlockAddress dest, const BlockPayload& surface);
Frame make_get_status(BlockAddress dest);
Frame make_ping(BlockAddress dest);
Frame make_reset(BlockAddress dest);
// Up-chain replies are addressed to broadcast; slaves never consume up-chain
// traffic, and the sender is carried in the payload.
Frame make_status_reply(const StatusReply& reply);
Frame make_pong(const Pong& pong);

std::optional<StatusReply> parse_status_reply(const Frame& frame);
std::optional<Pong> parse_pong(const Frame& frame);
BlockPayload set_config_surface(const Frame& frame);

}  // namespace ris::control
