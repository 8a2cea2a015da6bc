#include <random>

#include <gtest/gtest.h>

#include "ris/control/partition.hpp"
#include "ris/error.hpp"

namespace ris::control {
namespace {

PhaseConfig random_config(const ArrayGeometry& g, std::mt19937_64& rng) {
  PhaseConfig c(g.rows(), g.cols());
  for (std::size_t i = 0; i < c.size(); ++i) c.set(i, (rng() & 1U) != 0);
  return c;
}

TEST(Partition, TwoBlockHalves) {
  const ArrayGeometry g{8, 8, 1, 2, 0.041};
  PhaseConfig c(8, 16);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t col = 0; col < 8; ++col) c.set(r, col, true);
  c.set(0, 15, true);  // top-right corner of the right half
  const auto parts = partition_config(c, g);
  ASSERT_EQ(parts.size(), 2U);
  const BlockPayload left = {0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF};
  const BlockPayload right = {0x01, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_EQ(parts.at(BlockAddress(0)), left);
  EXPECT_EQ(parts.at(BlockAddress(1)), right);
}

TEST(Partition, AllZeroSixteenBySixteen) {
  const ArrayGeometry g{8, 8, 2, 2, 0.041};
  const auto parts = partition_config(PhaseConfig(16, 16), g);
  ASSERT_EQ(parts.size(), 4U);
  unsigned expect = 0;
  for (const auto& [addr, payload] : parts) {
    EXPECT_EQ(addr.value(), expect++);
    EXPECT_EQ(payload, BlockPayload{});
  }
}

TEST(Partition, TileAddressesRowMajor) {
  const ArrayGeometry g{8, 8, 3, 4, 0.041};
  EXPECT_EQ(tile_address(g, 0, 0).value(), 0);
  EXPECT_EQ(tile_address(g, 1, 2).value(), 6);
  EXPECT_EQ(tile_address(g, 2, 3).value(), 11);
  // Block (1, 2) covers rows 8..15, cols 16..23.
  PhaseConfig c(24, 32);
  c.set(8, 16, true);
  c.set(15, 23, true);
  const auto parts = partition_config(c, g);
  const BlockPayload want = {0x80, 0, 0, 0, 0, 0, 0, 0x01};
  EXPECT_EQ(parts.at(BlockAddress(6)), want);
}

TEST(Partition, RoundTripEveryTiling) {
  std::mt19937_64 rng(17);
  const ArrayGeometry tilings[] = {{8, 8, 1, 1, 0.041}, {8, 8, 1, 2, 0.041}, {8, 8, 2, 2, 0.041},
                                   {8, 8, 4, 4, 0.041}, {8, 8, 2, 1, 0.041}, {2, 2, 1, 1, 0.041},
                                   {4, 8, 2, 3, 0.041}};
  for (const auto& g : tilings) {
    for (int t = 0; t < 200; ++t) {
      const auto c = random_config(g, rng);
      EXPECT_EQ(reassemble_config(partition_config(c, g), g), c);
    }
  }
}

TEST(Partition, SmallBlocksZeroPad) {
  const ArrayGeometry g{2, 2, 1, 1, 0.041};
  PhaseConfig c(2, 2);
  c.set(0, true);
  c.set(3, true);
  const BlockPayload want = {0x90, 0, 0, 0, 0, 0, 0, 0};  // bits 1001 then padding
  EXPECT_EQ(partition_config(c, g).at(BlockAddress(0)), want);
}

TEST(Partition, Errors) {
  EXPECT_THROW(partition_config(PhaseConfig(8, 8), {8, 8, 1, 2, 0.041}), Error);
  EXPECT_THROW(require_partitionable({8, 8, 4, 5, 0.041}), Error);
  EXPECT_THROW(require_partitionable({9, 8, 1, 1, 0.041}), Error);
  EXPECT_NO_THROW(require_partitionable({8, 8, 4, 4, 0.041}));
  const ArrayGeometry g{8, 8, 1, 2, 0.041};
  auto parts = partition_config(PhaseConfig(8, 16), g);
  parts.erase(BlockAddress(1));
  EXPECT_THROW(reassemble_config(parts, g), Error);
}

}  // namespace
}  // namespace ris::control
