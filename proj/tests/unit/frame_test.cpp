#include <random>
#include <string>

#include <gtest/gtest.h>

#include "oracles/crc_reference.hpp"
#include "ris/control/crc.hpp"
#include "ris/control/frame.hpp"
#include "ris/error.hpp"

namespace ris::control {
namespace {

std::vector<std::uint8_t> bytes(const std::string& s) { return {s.begin(), s.end()}; }

std::optional<DecodeError> error_of(const std::vector<std::uint8_t>& b) {
  const auto r = decode_frame(b);
  if (const auto* e = std::get_if<DecodeError>(&r)) return *e;
  return std::nullopt;
}

Frame random_frame(std::mt19937_64& rng) {
  static const Opcode ops[] = {Opcode::kSetConfig, Opcode::kGetStatus, Opcode::kStatusReply,
                               Opcode::kPing,      Opcode::kPong,      Opcode::kReset};
  Frame f;
  f.opcode = ops[rng() % 6];
  const unsigned a = rng() % 17;
  f.dest = a == 16 ? BlockAddress::broadcast() : BlockAddress(a);
  f.payload.resize(payload_size(f.opcode));
  for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng());
  return f;
}

TEST(Crc, CheckValues) {
  EXPECT_EQ(crc16({}), 0xFFFF);
  EXPECT_EQ(crc16(bytes("123456789")), 0x29B1);
  EXPECT_EQ(oracle::crc16_bitwise(bytes("123456789")), 0x29B1);
}

TEST(Crc, MatchesBitwiseReference) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 500; ++t) {
    std::vector<std::uint8_t> data(rng() % 80);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    EXPECT_EQ(crc16(data), oracle::crc16_bitwise(data));
  }
}

TEST(Crc, SingleBitFlipChangesValue) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 2000; ++t) {
    std::vector<std::uint8_t> data(1 + rng() % 70);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    const auto before = crc16(data);
    data[rng() % data.size()] ^= static_cast<std::uint8_t>(1U << (rng() % 8));
    EXPECT_NE(crc16(data), before);
  }
}

TEST(Address, Switches) {
  EXPECT_EQ(BlockAddress::from_switches(true, false, false, true).value(), 9);
  EXPECT_EQ(BlockAddress::from_switches(true, true, true, true).value(), 15);
  EXPECT_EQ(BlockAddress::from_switches(false, false, false, false).value(), 0);
  EXPECT_THROW(BlockAddress(16), Error);
  EXPECT_TRUE(BlockAddress::broadcast().is_broadcast());
}

TEST(Encode, PingToThree) {
  const auto wire = encode_frame(make_ping(BlockAddress(3)));
  const std::uint16_t crc = oracle::crc16_bitwise({kProtocolVersion, 0x03, 0x04, 0x00});
  const std::vector<std::uint8_t> want = {0xA5, kProtocolVersion, 0x03, 0x04, 0x00, static_cast<std::uint8_t>(crc >> 8),
                                          static_cast<std::uint8_t>(crc & 0xFF)};
  EXPECT_EQ(wire, want);
}

TEST(Encode, BroadcastAllOnSetConfig) {
  BlockPayload all_on;
  all_on.fill(0xFF);
  const auto wire = encode_frame(make_set_config(BlockAddress::broadcast(), all_on));
  ASSERT_EQ(wire.size(), kHeaderSize + 8 + kCrcSize);
  EXPECT_EQ(wire[2], 0xFF);
  EXPECT_EQ(wire[3], 0x01);
  EXPECT_EQ(wire[4], 8);
  for (std::size_t i = 5; i < 13; ++i) EXPECT_EQ(wire[i], 0xFF);
}

TEST(Encode, Rejects) {
  Frame big{kProtocolVersion, BlockAddress(1), Opcode::kSetConfig, std::vector<std::uint8_t>(65)};
  EXPECT_THROW(encode_frame(big), Error);
  Frame mismatch{kProtocolVersion, BlockAddress(1), Opcode::kPing, {0x01}};
  EXPECT_THROW(encode_frame(mismatch), Error);
}

TEST(Decode, RoundTripRandom) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 2000; ++t) {
    const Frame f = random_frame(rng);
    const auto r = decode_frame(encode_frame(f));
    ASSERT_TRUE(std::holds_alternative<Frame>(r));
    EXPECT_EQ(std::get<Frame>(r), f);
  }
}

TEST(Decode, DistinguishesErrors) {
  const auto ping = encode_frame(make_ping(BlockAddress(3)));
  auto bad_crc = ping;
  bad_crc.back() ^= 0x01;
  EXPECT_EQ(error_of(bad_crc), DecodeError::kBadCrc);

  auto bad_sof = ping;
  bad_sof[0] = 0x00;
  EXPECT_EQ(error_of(bad_sof), DecodeError::kBadSof);
  EXPECT_EQ(error_of({0x00, 0x01}), DecodeError::kBadSof);

  EXPECT_EQ(error_of({}), DecodeError::kTruncated);
  EXPECT_EQ(error_of({0xA5, 0x01, 0x03}), DecodeError::kTruncated);
  EXPECT_EQ(error_of(std::vector<std::uint8_t>(ping.begin(), ping.end() - 1)), DecodeError::kTruncated);

  auto trailing = ping;
  trailing.push_back(0x00);
  EXPECT_EQ(error_of(trailing), DecodeError::kBadLength);
  EXPECT_EQ(error_of({0xA5, 0x01, 0x03, 0x04, 65}), DecodeError::kBadLength);

  EXPECT_EQ(error_of(oracle::raw_frame(kProtocolVersion, 0x03, 0x09, {})), DecodeError::kBadOpcode);
  EXPECT_EQ(error_of(oracle::raw_frame(kProtocolVersion, 0x20, 0x04, {})), DecodeError::kBadAddress);
  EXPECT_EQ(error_of(oracle::raw_frame(kProtocolVersion, 0x03, 0x01, {1, 2, 3})), DecodeError::kBadLength);
}

TEST(Decode, EverySingleByteCorruptionRejected) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 40; ++t) {
    const auto wire = encode_frame(random_frame(rng));
    for (std::size_t i = 0; i < wire.size(); ++i) {
      for (unsigned v = 0; v < 256; ++v) {
        if (v == wire[i]) continue;
        auto bad = wire;
        bad[i] = static_cast<std::uint8_t>(v);
        ASSERT_TRUE(error_of(bad).has_value()) << "pos " << i << " value " << v;
      }
    }
  }
}

TEST(Payloads, StatusReplyAndPongRoundTrip) {
  StatusReply r{BlockAddress(9), StatusCode::kBadCrc, false, {1, 2, 3, 4, 5, 6, 7, 8}};
  const Frame f = make_status_reply(r);
  EXPECT_TRUE(f.dest.is_broadcast());
  const auto decoded = decode_frame(encode_frame(f));
  ASSERT_TRUE(std::holds_alternative<Frame>(decoded));
  EXPECT_EQ(parse_status_reply(std::get<Frame>(decoded)), r);
  EXPECT_FALSE(parse_pong(f).has_value());

  const Pong p{BlockAddress(4), BlockMode::kSlave};
  const auto back = parse_pong(make_pong(p));
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(back->source, p.source);
  EXPECT_EQ(back->mode, p.mode);
}

TEST(Payloads, SetConfigSurface) {
  const BlockPayload bits = {0x80, 0, 0, 0, 0, 0, 0, 0x01};
  EXPECT_EQ(set_config_surface(make_set_config(BlockAddress(2), bits)), bits);
}

TEST(Names, OpcodesAndStatus) {
  for (std::uint8_t b = 1; b <= 6; ++b) {
    const auto op = opcode_from_byte(b);
    ASSERT_TRUE(op.has_value());
    EXPECT_EQ(opcode_from_string(to_string(*op)), op);
  }
  EXPECT_FALSE(opcode_from_byte(0).has_value());
  EXPECT_EQ(to_string(Opcode::kSetConfig), "SET_CONFIG");
  EXPECT_EQ(to_status(DecodeError::kBadCrc), StatusCode::kBadCrc);
}

}  // namespace
}  // namespace ris::control
