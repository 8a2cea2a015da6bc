#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ris {

inline constexpr double kSpeedOfLight = 299792458.0;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

nlohmann::json to_json(const Vec3& v);
Vec3 vec3_from_json(const nlohmann::json& j);

/// Element lattice built from identical square-pitch blocks.
///
/// Element (r, c) of the full R x C array sits at
/// ((c - (C-1)/2) * pitch, ((R-1)/2 - r) * pitch, 0); the surface normal is +z.
struct ArrayGeometry {
  std::size_t block_rows = 8;
  std::size_t block_cols = 8;
  std::size_t tile_rows = 1;
  std::size_t tile_cols = 1;
  double pitch_m = 0.041;

  std::size_t rows() const { return block_rows * tile_rows; }
  std::size_t cols() const { return block_cols * tile_cols; }
  std::size_t size() const { return rows() * cols(); }
  std::size_t block_count() const { return tile_rows * tile_cols; }

  Vec3 position(std::size_t r, std::size_t c) const;
  void validate() const;

  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;

  nlohmann::json to_json() const;
  static ArrayGeometry from_json(const nlohmann::json& j);
};

/// One bit per element, row-major; 1 means the PIN diode is ON.
class PhaseConfig {
 public:
  PhaseConfig() = default;
  PhaseConfig(std::size_t rows, std::size_t cols);
  PhaseConfig(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> bits);

  static PhaseConfig all_off(const ArrayGeometry& geom) { return PhaseConfig(geom.rows(), geom.cols()); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return bits_.size(); }

  bool on(std::size_t index) const { return bits_[index] != 0; }
  bool on(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c] != 0; }
  void set(std::size_t index, bool value) { bits_[index] = value ? 1 : 0; }
  void set(std::size_t r, std::size_t c, bool value) { set(r * cols_ + c, value); }
  void flip(std::size_t index) { bits_[index] ^= 1U; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  PhaseConfig complement() const;
  bool matches(const ArrayGeometry& geom) const { return rows_ == geom.rows() && cols_ == geom.cols(); }
  void require_matches(const ArrayGeometry& geom) const;

  friend bool operator==(const PhaseConfig&, const PhaseConfig&) = default;

  /// Rows packed MSB-first into whole bytes, uppercase hex, rows concatenated.
  std::string to_hex() const;
  /// Same encoding with one row per line (the config-file form).
  std::string to_hex_lines() const;
  /// Accepts either form; whitespace is ignored.
  static PhaseConfig from_hex(std::string_view hex, std::size_t rows, std::size_t cols);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct Placement {
  Vec3 tx_pos;
  Vec3 rx_pos;

  void validate() const;
  friend bool operator==(const Placement&, const Placement&) = default;
};

struct Direction {
  double theta_deg = 0.0;  // from the surface normal
  double phi_deg = 0.0;

  Vec3 unit() const;
};

std::string bytes_to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> hex_to_bytes(std::string_view hex);

}  // namespace ris
