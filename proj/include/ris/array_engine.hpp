#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "ris/cell_model.hpp"
#include "ris/geometry.hpp"

namespace ris {

/// Knobs that are off by default. The defaults give an isotropic element, a
/// spherical-wave feed at tx_pos and no direct Tx->Rx path.
struct EngineOptions {
  // Treat tx_pos as a direction only: unit-amplitude plane wave, phase
  // referenced to the array origin.
  bool plane_wave_feed = false;
  // Element pattern cos^q(theta) applied to both the incident and the
  // scattered direction.
  double element_cos_exponent = 0.0;
  // Additive direct-path term in channel_gain.
  std::complex<double> leakage{0.0, 0.0};

  nlohmann::json to_json() const;
  static EngineOptions from_json(const nlohmann::json& j);
};

/// Row-major matrix of per-element phases in degrees, each in [0, 360).
struct PhaseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> deg;

  double at(std::size_t r, std::size_t c) const { return deg[r * cols + c]; }
};

std::vector<Vec3> element_positions(const ArrayGeometry& geom);

/// Continuous reflectarray phase that turns the feed wave into a beam toward
/// `target`: k * (|tx - p| - p . u), wrapped to [0, 360).
PhaseMatrix ideal_element_phase_deg(const ArrayGeometry& geom, const Vec3& tx_pos, const Direction& target,
                                    double f_hz, const EngineOptions& opts = {});

/// Picks, per element, the state whose reflection has the largest projection
/// onto the ideal phasor. Ties go to OFF.
PhaseConfig quantize_codebook(const PhaseMatrix& ideal_deg, const UnitCellModel& model, double f_hz);

/// Tx -> element -> Rx cascade at one frequency with the per-element path
/// terms precomputed. gain() sums over elements in row-major order, so the
/// result does not depend on who calls it or when.
class CascadeChannel {
 public:
  CascadeChannel(const ArrayGeometry& geom, const UnitCellModel& model, const Placement& placement, double f_hz,
                 const EngineOptions& opts = {});

  std::complex<double> gain(const PhaseConfig& config) const;

  const ArrayGeometry& geometry() const { return geom_; }
  double frequency_hz() const { return f_hz_; }
  std::span<const std::complex<double>> path_terms() const { return path_; }
  std::complex<double> reflection(PinState s) const { return gamma_[static_cast<std::size_t>(s)]; }

 private:
  ArrayGeometry geom_;
  double f_hz_;
  std::vector<std::complex<double>> path_;
  std::array<std::complex<double>, 2> gamma_;
  std::complex<double> leakage_;
};

std::complex<double> channel_gain(const ArrayGeometry& geom, const PhaseConfig& config, const UnitCellModel& model,
                                  const Placement& placement, double f_hz, const EngineOptions& opts = {});

/// 20 log10(|gain| / |ref|) + offset_db.
double received_power_db(std::complex<double> gain, double ref_magnitude, double offset_db = 0.0);
double received_power_db(std::complex<double> gain, std::complex<double> ref, double offset_db = 0.0);

struct PatternPoint {
  double theta_deg = 0.0;
  double power_db = 0.0;
};

/// Far-field pattern in the phi_deg half-plane, normalized to a 0 dB peak over
/// the grid.
std::vector<PatternPoint> radiation_pattern(const ArrayGeometry& geom, const PhaseConfig& config,
                                            const UnitCellModel& model, const Vec3& tx_pos, double f_hz,
                                            std::span<const double> theta_grid, double phi_deg,
                                            const EngineOptions& opts = {});

struct PowerReference {
  double magnitude = 1.0;
  double offset_db = 0.0;
};

struct SweepPoint {
  double freq_hz = 0.0;
  double config_db = 0.0;
  double base_db = 0.0;

  double delta_db() const { return config_db - base_db; }
};

std::vector<SweepPoint> frequency_sweep(const ArrayGeometry& geom, const PhaseConfig& config,
                                        const PhaseConfig& baseline, const UnitCellModel& model,
                                        const Placement& placement, std::span<const double> f_grid,
                                        PowerReference ref = {}, const EngineOptions& opts = {});

/// n evenly spaced values from lo to hi inclusive; the last value is exactly hi.
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace ris
