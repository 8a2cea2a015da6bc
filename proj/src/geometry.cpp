#include "ris/geometry.hpp"

#include <cctype>
#include <numbers>

#include "ris/error.hpp"

namespace ris {

namespace {

constexpr char kHexDigits[] = "0123456789ABCDEF";

int hex_value(char ch) {
  if (ch >= '0' && ch <= '9') return ch - '0';
  if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
  if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
  return -1;
}

std::size_t row_bytes(std::size_t cols) { return (cols + 7) / 8; }

}  // namespace

nlohmann::json to_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kParse, "expected a 3-vector [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Vec3 ArrayGeometry::position(std::size_t r, std::size_t c) const {
  const double half_r = (static_cast<double>(rows()) - 1.0) / 2.0;
  const double half_c = (static_cast<double>(cols()) - 1.0) / 2.0;
  return {(static_cast<double>(c) - half_c) * pitch_m, (half_r - static_cast<double>(r)) * pitch_m, 0.0};
}

void ArrayGeometry::validate() const {
  if (block_rows == 0 || block_cols == 0 || tile_rows == 0 || tile_cols == 0) {
    throw Error(ErrorCode::kInvalidArgument, "geometry dimensions must be positive", to_json());
  }
  if (!(pitch_m > 0.0) || !std::isfinite(pitch_m)) {
    throw Error(ErrorCode::kInvalidArgument, "pitch must be positive", to_json());
  }
}

nlohmann::json ArrayGeometry::to_json() const {
  return {{"block_rows", block_rows},
          {"block_cols", block_cols},
          {"tile_rows", tile_rows},
          {"tile_cols", tile_cols},
          {"pitch_m", pitch_m}};
}

ArrayGeometry ArrayGeometry::from_json(const nlohmann::json& j) {
  ArrayGeometry g;
  g.block_rows = j.value("block_rows", g.block_rows);
  g.block_cols = j.value("block_cols", g.block_cols);
  g.tile_rows = j.value("tile_rows", g.tile_rows);
  g.tile_cols = j.value("tile_cols", g.tile_cols);
  g.pitch_m = j.value("pitch_m", g.pitch_m);
  g.validate();
  return g;
}

PhaseConfig::PhaseConfig(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), bits_(rows * cols, 0) {}

PhaseConfig::PhaseConfig(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> bits)
    : rows_(rows), cols_(cols), bits_(std::move(bits)) {
  if (bits_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kDimensionMismatch, "bit vector does not match config dimensions",
                {{"rows", rows_}, {"cols", cols_}, {"bits", bits_.size()}});
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

PhaseConfig PhaseConfig::complement() const {
  PhaseConfig out = *this;
  for (auto& b : out.bits_) b ^= 1U;
  return out;
}

void PhaseConfig::require_matches(const ArrayGeometry& geom) const {
  if (!matches(geom)) {
    throw Error(ErrorCode::kDimensionMismatch, "phase config does not match array geometry",
                {{"config_rows", rows_}, {"config_cols", cols_}, {"geom_rows", geom.rows()}, {"geom_cols", geom.cols()}});
  }
}

std::string PhaseConfig::to_hex() const {
  std::string out;
  out.reserve(rows_ * row_bytes(cols_) * 2);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t byte = 0; byte < row_bytes(cols_); ++byte) {
      unsigned value = 0;
      for (std::size_t bit = 0; bit < 8; ++bit) {
        const std::size_t c = byte * 8 + bit;
        if (c < cols_ && on(r, c)) value |= 0x80U >> bit;
      }
      out.push_back(kHexDigits[value >> 4]);
      out.push_back(kHexDigits[value & 0x0F]);
    }
  }
  return out;
}

std::string PhaseConfig::to_hex_lines() const {
  const std::string flat = to_hex();
  const std::size_t width = row_bytes(cols_) * 2;
  std::string out;
  for (std::size_t r = 0; r < rows_; ++r) {
    out.append(flat, r * width, width);
    out.push_back('\n');
  }
  return out;
}

PhaseConfig PhaseConfig::from_hex(std::string_view hex, std::size_t rows, std::size_t cols) {
  std::string digits;
  digits.reserve(hex.size());
  for (char ch : hex) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    if (hex_value(ch) < 0) {
      throw Error(ErrorCode::kParse, "config hex contains a non-hex character", {{"char", std::string(1, ch)}});
    }
    digits.push_back(ch);
  }
  const std::size_t expected = rows * row_bytes(cols) * 2;
  if (digits.size() != expected) {
    throw Error(ErrorCode::kDimensionMismatch, "config hex has the wrong length for the array",
                {{"rows", rows}, {"cols", cols}, {"expected_digits", expected}, {"got_digits", digits.size()}});
  }
  PhaseConfig cfg(rows, cols);
  std::size_t pos = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t byte = 0; byte < row_bytes(cols); ++byte) {
      const unsigned value = static_cast<unsigned>(hex_value(digits[pos]) << 4 | hex_value(digits[pos + 1]));
      pos += 2;
      for (std::size_t bit = 0; bit < 8; ++bit) {
        const bool set = (value & (0x80U >> bit)) != 0;
        const std::size_t c = byte * 8 + bit;
        if (c < cols) {
          cfg.set(r, c, set);
        } else if (set) {
          throw Error(ErrorCode::kParse, "config hex sets padding bits beyond the last column", {{"row", r}});
        }
      }
    }
  }
  return cfg;
}

void Placement::validate() const {
  if (!(tx_pos.z > 0.0) || !(rx_pos.z > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tx and rx must lie in front of the surface (z > 0)",
                {{"tx_pos", ris::to_json(tx_pos)}, {"rx_pos", ris::to_json(rx_pos)}});
  }
}

Vec3 Direction::unit() const {
  const double t = theta_deg * std::numbers::pi / 180.0;
  const double p = phi_deg * std::numbers::pi / 180.0;
  return {std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
}

std::string bytes_to_hex(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0x0F]);
  }
  return out;
}

std::vector<std::uint8_t> hex_to_bytes(std::string_view hex) {
  std::string digits;
  for (char ch : hex) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    if (hex_value(ch) < 0) throw Error(ErrorCode::kParse, "non-hex character in byte string", {{"char", std::string(1, ch)}});
    digits.push_back(ch);
  }
  if (digits.size() % 2 != 0) throw Error(ErrorCode::kParse, "byte string has an odd number of hex digits");
  std::vector<std::uint8_t> out(digits.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(hex_value(digits[2 * i]) << 4 | hex_value(digits[2 * i + 1]));
  }
  return out;
}

}  // namespace ris
