#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ris/array_engine.hpp"
#include "ris/cell_model.hpp"
#include "ris/geometry.hpp"

namespace ris::testbed {

inline constexpr int kScenarioSchemaVersion = 1;

/// Tx/Rx placement plus everything the virtual testbed needs to turn a phase
/// configuration into a received power reading.
struct Scenario {
  ArrayGeometry geometry{8, 8, 1, 2, 0.041};
  Placement placement;
  UnitCellModel model = UnitCellModel::default_model();
  bool default_model = true;
  double f_probe_hz = 3.75e9;
  std::vector<double> f_grid_hz;
  double offset_db = 24.0;
  double noise_sigma_db = 0.0;
  std::uint64_t seed = 0;
  // |H| that reads as offset_db. Unset means |H(all-OFF)| at f_probe_hz.
  std::optional<double> reference_gain;
  EngineOptions engine;

  /// Two 8x8 blocks side by side; Tx 1 m on the normal, Rx 2 m at 20 deg
  /// off the normal in the phi = 90 deg plane; probe at 3.75 GHz; 141-point
  /// grid over 3.3-4.0 GHz.
  static Scenario default_scenario();

  /// `base_dir` resolves a model given as a relative file path.
  static Scenario from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  static Scenario load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// Throws ErrorCode::kScenarioViolation describing the first broken rule.
  void validate() const;
};

/// Position at `distance_m` along direction (theta, phi) from the array origin.
Vec3 polar_position(double distance_m, double theta_deg, double phi_deg);

}  // namespace ris::testbed
