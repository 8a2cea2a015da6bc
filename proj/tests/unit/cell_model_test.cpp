#include <cmath>
#include <complex>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "ris/cell_model.hpp"
#include "ris/error.hpp"

namespace ris {
namespace {

constexpr double kPi = 3.14159265358979323846;

double arg_deg(std::complex<double> z) { return std::arg(z) * 180.0 / kPi; }

double wrap180(double d) {
  double w = std::fmod(d + 180.0, 360.0);
  if (w < 0) w += 360.0;
  return w - 180.0;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ris::Error thrown";
  return ErrorCode::kIo;
}

TEST(CellModel, DefaultOffAtCenterAboveMinus3dB) {
  const auto& m = UnitCellModel::default_model();
  EXPECT_GE(std::abs(m.reflection(PinState::kOff, 3.75e9)), std::pow(10.0, -3.0 / 20.0));
}

TEST(CellModel, AnchorsReproducedExactly) {
  const auto& m = UnitCellModel::default_model();
  for (PinState s : {PinState::kOff, PinState::kOn}) {
    for (const auto& a : m.anchors(s)) {
      const auto g = m.reflection(s, a.freq_hz);
      const double want = std::pow(10.0, a.mag_db / 20.0);
      EXPECT_NEAR(std::abs(g), want, 1e-12 * want);
      EXPECT_NEAR(wrap180(arg_deg(g) - a.phase_deg), 0.0, 1e-9);
    }
  }
}

TEST(CellModel, OnMidpointBetweenAnchors) {
  // ON anchors at 3.75 GHz (-1.7 dB, 20 deg) and 3.80 GHz (-1.8 dB, 13 deg).
  const auto& m = UnitCellModel::default_model();
  EXPECT_NEAR(m.magnitude_db(PinState::kOn, 3.775e9), -1.75, 1e-12);
  EXPECT_NEAR(m.unwrapped_phase_deg(PinState::kOn, 3.775e9), 16.5, 1e-9);
  const auto g = m.reflection(PinState::kOn, 3.775e9);
  EXPECT_NEAR(std::abs(g), std::pow(10.0, -1.75 / 20.0), 1e-12);
  EXPECT_NEAR(arg_deg(g), 16.5, 1e-9);
}

TEST(CellModel, PhaseDifferenceAtCenterAndBandEdges) {
  const auto& m = UnitCellModel::default_model();
  const double center = m.phase_difference_deg(3.75e9);
  EXPECT_GE(std::abs(center), 160.0);
  EXPECT_LE(std::abs(center), 200.0);
  // ON - OFF at the band-edge anchors: 27 - (-145) and 13 - (-175).
  EXPECT_NEAR(m.phase_difference_deg(3.70e9), 172.0, 1e-9);
  EXPECT_NEAR(m.phase_difference_deg(3.80e9), 188.0, 1e-9);
}

TEST(CellModel, PhaseDifferenceOfIdenticalCurvesIsZero) {
  const auto& d = UnitCellModel::default_model();
  const std::vector<ReflectionAnchor> off(d.anchors(PinState::kOff).begin(), d.anchors(PinState::kOff).end());
  const UnitCellModel same(off, off);
  for (double f = 3.3e9; f <= 4.0e9; f += 0.05e9) EXPECT_EQ(same.phase_difference_deg(f), 0.0);
}

TEST(CellModel, UnwrapAcrossTheBranchCut) {
  // -170 -> 170 is a 20 deg step backwards once unwrapped, not +340.
  const UnitCellModel m({{3.0e9, -1.0, -170.0}, {4.0e9, -1.0, 170.0}}, {{3.0e9, -1.0, 0.0}, {4.0e9, -1.0, 0.0}},
                        {3.7e9, 3.8e9}, 3.75e9);
  EXPECT_NEAR(m.unwrapped_phase_deg(PinState::kOff, 3.5e9), -180.0, 1e-9);
}

TEST(CellModel, PassiveEverywhereInSpan) {
  const auto& m = UnitCellModel::default_model();
  std::mt19937_64 rng(1);
  for (PinState s : {PinState::kOff, PinState::kOn}) {
    const auto span = m.span(s);
    std::uniform_real_distribution<double> f(span.lo_hz, span.hi_hz);
    for (int i = 0; i < 2000; ++i) EXPECT_LE(std::abs(m.reflection(s, f(rng))), 1.0);
  }
}

TEST(CellModel, OutOfSpanNamesTheSpan) {
  const auto& m = UnitCellModel::default_model();
  try {
    m.reflection(PinState::kOn, 5.0e9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfRange);
    EXPECT_EQ(e.context().at("span_lo_hz").get<double>(), 3.3e9);
    EXPECT_EQ(e.context().at("span_hi_hz").get<double>(), 4.0e9);
  }
}

TEST(CellModel, RejectsBadAnchorTables) {
  const std::vector<ReflectionAnchor> ok = {{3.0e9, -1.0, 0.0}, {4.0e9, -1.0, 0.0}};
  EXPECT_EQ(code_of([&] { UnitCellModel({{3.0e9, 0.5, 0.0}, {4.0e9, -1.0, 0.0}}, ok); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { UnitCellModel({{4.0e9, -1.0, 0.0}, {3.0e9, -1.0, 0.0}}, ok); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { UnitCellModel({{3.0e9, -1.0, 180.0}, {4.0e9, -1.0, 0.0}}, ok); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { UnitCellModel({{3.72e9, -1.0, 0.0}, {4.0e9, -1.0, 0.0}}, ok); }), ErrorCode::kInvalidArgument);
}

TEST(CellModel, JsonRoundTrip) {
  const auto& m = UnitCellModel::default_model();
  const auto copy = UnitCellModel::from_json(m.to_json());
  for (double f = 3.3e9; f <= 4.0e9; f += 0.01e9) {
    EXPECT_EQ(copy.reflection(PinState::kOn, f), m.reflection(PinState::kOn, f));
    EXPECT_EQ(copy.reflection(PinState::kOff, f), m.reflection(PinState::kOff, f));
  }
}

TEST(CellModel, LoadsShippedFile) {
  const auto m = UnitCellModel::load(RIS_DATA_DIR "/default_cell_model.json");
  EXPECT_EQ(m.reflection(PinState::kOn, 3.71e9), UnitCellModel::default_model().reflection(PinState::kOn, 3.71e9));
}

TEST(CellModel, MalformedJsonIsParseError) {
  EXPECT_EQ(code_of([] { UnitCellModel::from_json(nlohmann::json::parse(R"({"states": 3})")); }), ErrorCode::kParse);
}

TEST(ValidateBand, DefaultPassesDesignWindow) {
  const auto r = validate_band(UnitCellModel::default_model(), {3.7e9, 3.8e9}, -3.0, 180.0, 20.0, 101);
  EXPECT_TRUE(r.pass);
  EXPECT_GE(r.min_magnitude_db_off, -3.0);
  EXPECT_GE(r.min_magnitude_db_on, -3.0);
  EXPECT_NEAR(r.phase_diff_min_deg, 172.0, 1e-9);
  EXPECT_NEAR(r.phase_diff_max_deg, 188.0, 1e-9);
}

TEST(ValidateBand, ZeroFloorFails) {
  EXPECT_FALSE(validate_band(UnitCellModel::default_model(), {3.7e9, 3.8e9}, 0.0, 180.0, 20.0, 101).pass);
}

TEST(ValidateBand, WideBandFails) {
  const auto r = validate_band(UnitCellModel::default_model(), {3.3e9, 4.0e9}, -3.0, 180.0, 20.0, 101);
  EXPECT_FALSE(r.pass);
  EXPECT_LT(r.phase_diff_min_deg, 160.0);
}

TEST(ValidateBand, GridRefinementKeepsVerdict) {
  // 3.70, 3.75, 3.80 GHz anchors sit on both grids.
  const auto& m = UnitCellModel::default_model();
  for (double tol : {5.0, 8.0, 10.0, 20.0}) {
    const auto coarse = validate_band(m, {3.7e9, 3.8e9}, -3.0, 180.0, tol, 11);
    const auto fine = validate_band(m, {3.7e9, 3.8e9}, -3.0, 180.0, tol, 21);
    EXPECT_EQ(coarse.pass, fine.pass) << tol;
    EXPECT_NEAR(coarse.phase_diff_min_deg, fine.phase_diff_min_deg, 1e-9);
    EXPECT_NEAR(coarse.phase_diff_max_deg, fine.phase_diff_max_deg, 1e-9);
  }
}

TEST(ValidateBand, Errors) {
  const auto& m = UnitCellModel::default_model();
  EXPECT_EQ(code_of([&] { validate_band(m, {3.7e9, 3.8e9}, -3, 180, 20, 1); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { validate_band(m, {3.2e9, 3.8e9}, -3, 180, 20, 11); }), ErrorCode::kOutOfRange);
}

}  // namespace
}  // namespace ris
