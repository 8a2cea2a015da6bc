#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ris {

// OFF is the unbiased diode (0 V); ON is the forward-biased diode.
enum class PinState : std::uint8_t { kOff = 0, kOn = 1 };

std::string_view to_string(PinState state);

struct ReflectionAnchor {
  double freq_hz = 0.0;
  double mag_db = 0.0;     // <= 0, passive element
  double phase_deg = 0.0;  // [-180, 180)
};

struct FrequencyBand {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

inline constexpr FrequencyBand kDefaultDesignBand{3.7e9, 3.8e9};
inline constexpr double kDefaultCenterFrequencyHz = 3.75e9;

struct BandReport {
  double min_magnitude_db_off = 0.0;
  double min_magnitude_db_on = 0.0;
  // ON-minus-OFF phase difference folded to the nearest equivalent of the
  // window center, i.e. center + wrap(diff - center).
  double phase_diff_min_deg = 0.0;
  double phase_diff_max_deg = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Two-state reflection response of one unit cell.
///
/// Each state is a frequency-ordered anchor table. Magnitude (dB) and phase
/// (degrees) are interpolated linearly between anchors; phases are unwrapped
/// once at construction so that consecutive anchors differ by less than 180
/// degrees. The model is immutable and safe to share between threads.
class UnitCellModel {
 public:
  UnitCellModel(std::vector<ReflectionAnchor> anchors_off, std::vector<ReflectionAnchor> anchors_on,
                FrequencyBand design_band = kDefaultDesignBand,
                double center_frequency_hz = kDefaultCenterFrequencyHz);

  /// Default n78 cell, built from the anchor table shipped in
  /// data/default_cell_model.json.
  static const UnitCellModel& default_model();

  /// Lossless reference cell with Γ_OFF = +1 and Γ_ON = -1 over `span`.
  static UnitCellModel idealized(FrequencyBand span = {3.0e9, 4.5e9});

  static UnitCellModel from_json(const nlohmann::json& doc);
  static UnitCellModel load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  std::complex<double> reflection(PinState state, double f_hz) const;
  double magnitude_db(PinState state, double f_hz) const;
  double unwrapped_phase_deg(PinState state, double f_hz) const;

  /// Unwrapped ON phase minus unwrapped OFF phase, reduced to (-360, 360).
  double phase_difference_deg(double f_hz) const;

  FrequencyBand span(PinState state) const;
  std::span<const ReflectionAnchor> anchors(PinState state) const;
  FrequencyBand design_band() const { return design_band_; }
  double center_frequency_hz() const { return center_frequency_hz_; }

 private:
  struct Curve {
    std::vector<ReflectionAnchor> raw;
    std::vector<double> freq_hz;
    std::vector<double> mag_db;
    std::vector<double> phase_deg;  // unwrapped
  };

  static Curve make_curve(std::vector<ReflectionAnchor> anchors, PinState state);
  const Curve& curve(PinState state) const { return state == PinState::kOn ? on_ : off_; }
  std::size_t segment(const Curve& c, double f_hz, PinState state) const;

  Curve off_;
  Curve on_;
  FrequencyBand design_band_;
  double center_frequency_hz_;
};

BandReport validate_band(const UnitCellModel& model, FrequencyBand band, double mag_floor_db,
                         double phase_center_deg, double phase_tol_deg, std::size_t n_grid);

}  // namespace ris
