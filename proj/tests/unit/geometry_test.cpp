#include <random>

#include <gtest/gtest.h>

#include "ris/array_engine.hpp"
#include "ris/error.hpp"
#include "ris/geometry.hpp"

namespace ris {
namespace {

PhaseConfig random_config(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  PhaseConfig c(rows, cols);
  for (std::size_t i = 0; i < c.size(); ++i) c.set(i, (rng() & 1U) != 0);
  return c;
}

TEST(Geometry, SingleElementAtOrigin) {
  const ArrayGeometry g{1, 1, 1, 1, 0.041};
  const auto p = element_positions(g);
  ASSERT_EQ(p.size(), 1U);
  EXPECT_EQ(p[0], (Vec3{0, 0, 0}));
}

TEST(Geometry, SixteenBySixteenCorner) {
  const ArrayGeometry g{8, 8, 2, 2, 0.041};
  const auto p = element_positions(g);
  ASSERT_EQ(p.size(), 256U);
  EXPECT_NEAR(p[0].x, -0.3075, 1e-15);
  EXPECT_NEAR(p[0].y, 0.3075, 1e-15);
  EXPECT_EQ(p[0].z, 0.0);
}

TEST(Geometry, TwoBlockExtentsAndCentroid) {
  const ArrayGeometry g{8, 8, 1, 2, 0.041};
  const auto p = element_positions(g);
  ASSERT_EQ(p.size(), 128U);
  double xmin = 1, xmax = -1, ymin = 1, ymax = -1, sx = 0, sy = 0;
  for (const auto& v : p) {
    xmin = std::min(xmin, v.x);
    xmax = std::max(xmax, v.x);
    ymin = std::min(ymin, v.y);
    ymax = std::max(ymax, v.y);
    sx += v.x;
    sy += v.y;
  }
  EXPECT_NEAR(xmax - xmin, 0.615, 1e-12);
  EXPECT_NEAR(ymax - ymin, 0.287, 1e-12);
  EXPECT_NEAR(sx, 0.0, 1e-12);
  EXPECT_NEAR(sy, 0.0, 1e-12);
  // Row-major: element 1 is one pitch to the right of element 0.
  EXPECT_NEAR(p[1].x - p[0].x, 0.041, 1e-15);
  EXPECT_NEAR(p[16].y - p[0].y, -0.041, 1e-15);
}

TEST(Geometry, ValidateRejectsZeroSizes) {
  EXPECT_THROW((ArrayGeometry{0, 8, 1, 1, 0.041}.validate()), Error);
  EXPECT_THROW((ArrayGeometry{8, 8, 1, 1, 0.0}.validate()), Error);
  EXPECT_NO_THROW((ArrayGeometry{}.validate()));
}

TEST(Geometry, JsonRoundTrip) {
  const ArrayGeometry g{4, 2, 3, 1, 0.05};
  EXPECT_EQ(ArrayGeometry::from_json(g.to_json()), g);
}

TEST(Direction, UnitVector) {
  const Vec3 u = Direction{30.0, 90.0}.unit();
  EXPECT_NEAR(u.x, 0.0, 1e-15);
  EXPECT_NEAR(u.y, 0.5, 1e-15);
  EXPECT_NEAR(u.z, std::sqrt(3.0) / 2.0, 1e-15);
}

TEST(Placement, MustBeInFront) {
  EXPECT_THROW((Placement{{0, 0, 0}, {0, 0, 1}}.validate()), Error);
  EXPECT_THROW((Placement{{0, 0, 1}, {0, 0, -1}}.validate()), Error);
  EXPECT_NO_THROW((Placement{{0, 0, 1}, {0, 0, 2}}.validate()));
}

TEST(PhaseConfigHex, KnownEncoding) {
  PhaseConfig c(2, 12);
  c.set(0, 0, true);
  c.set(0, 11, true);
  c.set(1, 3, true);
  // Row 0: 1000 0000 0001 (pad 0000) -> 80 10; row 1: 0001 0000 0000 -> 10 00.
  EXPECT_EQ(c.to_hex(), "80101000");
  EXPECT_EQ(c.to_hex_lines(), "8010\n1000\n");
  EXPECT_EQ(PhaseConfig::from_hex("80 10\n10 00", 2, 12), c);
  EXPECT_EQ(PhaseConfig::from_hex("80101000", 2, 12), c);
}

TEST(PhaseConfigHex, RoundTripRandom) {
  std::mt19937_64 rng(3);
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{8, 16}, {16, 16}, {1, 4}, {3, 5}, {2, 9}}) {
    for (int t = 0; t < 50; ++t) {
      const auto cfg = random_config(r, c, rng);
      EXPECT_EQ(PhaseConfig::from_hex(cfg.to_hex(), r, c), cfg);
      EXPECT_EQ(PhaseConfig::from_hex(cfg.to_hex_lines(), r, c), cfg);
    }
  }
}

TEST(PhaseConfigHex, Errors) {
  try {
    PhaseConfig::from_hex("0000", 8, 16);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  try {
    PhaseConfig::from_hex("0G", 1, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
  }
  try {
    PhaseConfig::from_hex("F1", 1, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
  }
  EXPECT_EQ(PhaseConfig::from_hex("f0", 1, 4).to_hex(), "F0");
}

TEST(PhaseConfig, ComplementAndMatches) {
  std::mt19937_64 rng(5);
  const auto c = random_config(8, 16, rng);
  const auto n = c.complement();
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NE(c.on(i), n.on(i));
  EXPECT_TRUE(c.matches(ArrayGeometry{8, 8, 1, 2, 0.041}));
  EXPECT_FALSE(c.matches(ArrayGeometry{8, 8, 2, 1, 0.041}));
  EXPECT_THROW(c.require_matches(ArrayGeometry{8, 8, 2, 1, 0.041}), Error);
}

TEST(HexBytes, RoundTrip) {
  const std::vector<std::uint8_t> b = {0x00, 0xA5, 0xFF, 0x10};
  EXPECT_EQ(bytes_to_hex(b), "00A5FF10");
  EXPECT_EQ(hex_to_bytes("00 a5 ff 10"), b);
  EXPECT_THROW(hex_to_bytes("ABC"), Error);
}

}  // namespace
}  // namespace ris
