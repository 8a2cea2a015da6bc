#include "ris/array_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ris/error.hpp"

namespace ris {

namespace {

using cplx = std::complex<double>;

double wavenumber(double f_hz) { return 2.0 * std::numbers::pi * f_hz / kSpeedOfLight; }

double wrap_360(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  return w;
}

// Incident field at element p, and cos of its incidence angle.
struct FeedTerm {
  cplx field;
  double cos_incidence;
};

FeedTerm feed_term(const Vec3& tx_pos, const Vec3& p, double k, const EngineOptions& opts) {
  if (opts.plane_wave_feed) {
    const double n = tx_pos.norm();
    if (n == 0.0) throw Error(ErrorCode::kDegenerateGeometry, "plane-wave feed direction is zero");
    const Vec3 u = (1.0 / n) * tx_pos;
    return {std::polar(1.0, k * p.dot(u)), u.z};
  }
  const double d = (tx_pos - p).norm();
  if (d == 0.0) {
    throw Error(ErrorCode::kDegenerateGeometry, "element coincides with the transmitter",
                {{"element", to_json(p)}, {"tx_pos", to_json(tx_pos)}});
  }
  return {std::polar(1.0 / d, -k * d), (tx_pos.z - p.z) / d};
}

double element_gain(double cos_angle, double exponent) {
  if (exponent == 0.0) return 1.0;
  return std::pow(std::max(cos_angle, 0.0), exponent);
}

}  // namespace

nlohmann::json EngineOptions::to_json() const {
  return {{"plane_wave_feed", plane_wave_feed},
          {"element_cos_exponent", element_cos_exponent},
          {"leakage", {leakage.real(), leakage.imag()}}};
}

EngineOptions EngineOptions::from_json(const nlohmann::json& j) {
  EngineOptions o;
  o.plane_wave_feed = j.value("plane_wave_feed", false);
  o.element_cos_exponent = j.value("element_cos_exponent", 0.0);
  if (j.contains("leakage")) o.leakage = {j["leakage"].at(0).get<double>(), j["leakage"].at(1).get<double>()};
  if (o.element_cos_exponent < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "element_cos_exponent must be >= 0");
  }
  return o;
}

std::vector<Vec3> element_positions(const ArrayGeometry& geom) {
  geom.validate();
  std::vector<Vec3> out;
  out.reserve(geom.size());
  for (std::size_t r = 0; r < geom.rows(); ++r) {
    for (std::size_t c = 0; c < geom.cols(); ++c) out.push_back(geom.position(r, c));
  }
  return out;
}

PhaseMatrix ideal_element_phase_deg(const ArrayGeometry& geom, const Vec3& tx_pos, const Direction& target,
                                    double f_hz, const EngineOptions& opts) {
  const double k = wavenumber(f_hz);
  const Vec3 u = target.unit();
  Vec3 feed_dir;
  if (opts.plane_wave_feed) feed_dir = (1.0 / tx_pos.norm()) * tx_pos;
  PhaseMatrix m{geom.rows(), geom.cols(), {}};
  m.deg.reserve(geom.size());
  for (const Vec3& p : element_positions(geom)) {
    const double feed_path = opts.plane_wave_feed ? -p.dot(feed_dir) : (tx_pos - p).norm();
    const double rad = k * (feed_path - p.dot(u));
    m.deg.push_back(wrap_360(rad * 180.0 / std::numbers::pi));
  }
  return m;
}

PhaseConfig quantize_codebook(const PhaseMatrix& ideal_deg, const UnitCellModel& model, double f_hz) {
  const cplx g_off = model.reflection(PinState::kOff, f_hz);
  const cplx g_on = model.reflection(PinState::kOn, f_hz);
  PhaseConfig cfg(ideal_deg.rows, ideal_deg.cols);
  for (std::size_t i = 0; i < ideal_deg.deg.size(); ++i) {
    const cplx target = std::polar(1.0, -ideal_deg.deg[i] * std::numbers::pi / 180.0);
    const double score_off = (g_off * target).real();
    const double score_on = (g_on * target).real();
    cfg.set(i, score_on > score_off);
  }
  return cfg;
}

CascadeChannel::CascadeChannel(const ArrayGeometry& geom, const UnitCellModel& model, const Placement& placement,
                               double f_hz, const EngineOptions& opts)
    : geom_(geom),
      f_hz_(f_hz),
      gamma_{model.reflection(PinState::kOff, f_hz), model.reflection(PinState::kOn, f_hz)},
      leakage_(opts.leakage) {
  const double k = wavenumber(f_hz);
  path_.reserve(geom.size());
  for (const Vec3& p : element_positions(geom)) {
    const FeedTerm in = feed_term(placement.tx_pos, p, k, opts);
    const double d_r = (placement.rx_pos - p).norm();
    if (d_r == 0.0) {
      throw Error(ErrorCode::kDegenerateGeometry, "element coincides with the receiver",
                  {{"element", to_json(p)}, {"rx_pos", to_json(placement.rx_pos)}});
    }
    const cplx out = std::polar(1.0 / d_r, -k * d_r);
    const double pattern = element_gain(in.cos_incidence, opts.element_cos_exponent) *
                           element_gain((placement.rx_pos.z - p.z) / d_r, opts.element_cos_exponent);
    path_.push_back(in.field * out * pattern);
  }
}

std::complex<double> CascadeChannel::gain(const PhaseConfig& config) const {
  config.require_matches(geom_);
  cplx sum{0.0, 0.0};
  for (std::size_t i = 0; i < path_.size(); ++i) sum += path_[i] * gamma_[config.bits()[i]];
  return sum + leakage_;
}

std::complex<double> channel_gain(const ArrayGeometry& geom, const PhaseConfig& config, const UnitCellModel& model,
                                  const Placement& placement, double f_hz, const EngineOptions& opts) {
  config.require_matches(geom);
  return CascadeChannel(geom, model, placement, f_hz, opts).gain(config);
}

double received_power_db(std::complex<double> gain, double ref_magnitude, double offset_db) {
  if (!(std::abs(ref_magnitude) > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "reference gain must be non-zero");
  }
  return 20.0 * std::log10(std::abs(gain) / std::abs(ref_magnitude)) + offset_db;
}

double received_power_db(std::complex<double> gain, std::complex<double> ref, double offset_db) {
  return received_power_db(gain, std::abs(ref), offset_db);
}

std::vector<PatternPoint> radiation_pattern(const ArrayGeometry& geom, const PhaseConfig& config,
                                            const UnitCellModel& model, const Vec3& tx_pos, double f_hz,
                                            std::span<const double> theta_grid, double phi_deg,
                                            const EngineOptions& opts) {
  if (theta_grid.empty()) throw Error(ErrorCode::kInvalidArgument, "theta grid is empty");
  config.require_matches(geom);
  const double k = wavenumber(f_hz);
  const cplx gamma[2] = {model.reflection(PinState::kOff, f_hz), model.reflection(PinState::kOn, f_hz)};

  const auto positions = element_positions(geom);
  std::vector<cplx> excitation;
  excitation.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const FeedTerm in = feed_term(tx_pos, positions[i], k, opts);
    excitation.push_back(in.field * gamma[config.bits()[i]] * element_gain(in.cos_incidence, opts.element_cos_exponent));
  }

  std::vector<double> magnitude;
  magnitude.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    const Vec3 u = Direction{theta, phi_deg}.unit();
    cplx sum{0.0, 0.0};
    for (std::size_t i = 0; i < positions.size(); ++i) sum += excitation[i] * std::polar(1.0, k * positions[i].dot(u));
    magnitude.push_back(std::abs(sum) * element_gain(u.z, opts.element_cos_exponent));
  }

  const double peak = *std::max_element(magnitude.begin(), magnitude.end());
  std::vector<PatternPoint> out;
  out.reserve(theta_grid.size());
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    const double db = peak > 0.0 ? 20.0 * std::log10(magnitude[i] / peak) : -std::numeric_limits<double>::infinity();
    out.push_back({theta_grid[i], db});
  }
  return out;
}

std::vector<SweepPoint> frequency_sweep(const ArrayGeometry& geom, const PhaseConfig& config,
                                        const PhaseConfig& baseline, const UnitCellModel& model,
                                        const Placement& placement, std::span<const double> f_grid,
                                        PowerReference ref, const EngineOptions& opts) {
  config.require_matches(geom);
  baseline.require_matches(geom);
  std::vector<SweepPoint> out;
  out.reserve(f_grid.size());
  for (double f : f_grid) {
    const CascadeChannel channel(geom, model, placement, f, opts);
    out.push_back({f, received_power_db(channel.gain(config), ref.magnitude, ref.offset_db),
                   received_power_db(channel.gain(baseline), ref.magnitude, ref.offset_db)});
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out;
  if (n == 0) return out;
  if (n == 1) return {lo};
  out.reserve(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  out.push_back(hi);
  return out;
}

}  // namespace ris
