#include "ris/cell_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "ris/error.hpp"

namespace ris {

namespace detail {
extern const char* const kDefaultCellModelJson;
}

namespace {

double wrap_deg(double deg) {
  double w = std::fmod(deg + 180.0, 360.0);
  if (w < 0.0) w += 360.0;
  return w - 180.0;
}

nlohmann::json span_context(FrequencyBand span, double f_hz) {
  return {{"freq_hz", f_hz}, {"span_lo_hz", span.lo_hz}, {"span_hi_hz", span.hi_hz}};
}

}  // namespace

std::string_view to_string(PinState state) { return state == PinState::kOn ? "ON" : "OFF"; }

nlohmann::json BandReport::to_json() const {
  return {{"min_magnitude_db_off", min_magnitude_db_off},
          {"min_magnitude_db_on", min_magnitude_db_on},
          {"phase_diff_range_deg", {phase_diff_min_deg, phase_diff_max_deg}},
          {"pass", pass}};
}

UnitCellModel::UnitCellModel(std::vector<ReflectionAnchor> anchors_off, std::vector<ReflectionAnchor> anchors_on,
                             FrequencyBand design_band, double center_frequency_hz)
    : off_(make_curve(std::move(anchors_off), PinState::kOff)),
      on_(make_curve(std::move(anchors_on), PinState::kOn)),
      design_band_(design_band),
      center_frequency_hz_(center_frequency_hz) {
  if (!(design_band_.lo_hz < design_band_.hi_hz)) {
    throw Error(ErrorCode::kInvalidArgument, "design band must satisfy lo < hi",
                {{"lo_hz", design_band_.lo_hz}, {"hi_hz", design_band_.hi_hz}});
  }
  for (const Curve* c : {&off_, &on_}) {
    if (c->freq_hz.front() > design_band_.lo_hz || c->freq_hz.back() < design_band_.hi_hz) {
      throw Error(ErrorCode::kInvalidArgument, "anchor table does not span the design band",
                  {{"state", std::string(to_string(c == &on_ ? PinState::kOn : PinState::kOff))},
                   {"span_lo_hz", c->freq_hz.front()},
                   {"span_hi_hz", c->freq_hz.back()}});
    }
  }
  if (center_frequency_hz_ < design_band_.lo_hz || center_frequency_hz_ > design_band_.hi_hz) {
    throw Error(ErrorCode::kInvalidArgument, "center frequency outside design band",
                {{"center_frequency_hz", center_frequency_hz_}});
  }
}

UnitCellModel::Curve UnitCellModel::make_curve(std::vector<ReflectionAnchor> anchors, PinState state) {
  const nlohmann::json ctx = {{"state", std::string(to_string(state))}};
  if (anchors.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "anchor table needs at least two anchors", ctx);
  }
  Curve c;
  c.freq_hz.reserve(anchors.size());
  c.mag_db.reserve(anchors.size());
  c.phase_deg.reserve(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const auto& a = anchors[i];
    if (!std::isfinite(a.freq_hz) || !std::isfinite(a.mag_db) || !std::isfinite(a.phase_deg)) {
      throw Error(ErrorCode::kInvalidArgument, "anchor has non-finite field", ctx);
    }
    if (i > 0 && !(a.freq_hz > anchors[i - 1].freq_hz)) {
      throw Error(ErrorCode::kInvalidArgument, "anchor frequencies must be strictly increasing",
                  {{"state", ctx["state"]}, {"index", i}});
    }
    if (a.mag_db > 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "anchor magnitude must be <= 0 dB (passive cell)",
                  {{"state", ctx["state"]}, {"index", i}, {"mag_db", a.mag_db}});
    }
    if (a.phase_deg < -180.0 || a.phase_deg >= 180.0) {
      throw Error(ErrorCode::kInvalidArgument, "anchor phase must lie in [-180, 180)",
                  {{"state", ctx["state"]}, {"index", i}, {"phase_deg", a.phase_deg}});
    }
    double phase = a.phase_deg;
    if (i > 0) {
      const double prev = c.phase_deg.back();
      while (phase - prev >= 180.0) phase -= 360.0;
      while (phase - prev <= -180.0) phase += 360.0;
    }
    c.freq_hz.push_back(a.freq_hz);
    c.mag_db.push_back(a.mag_db);
    c.phase_deg.push_back(phase);
  }
  c.raw = std::move(anchors);
  return c;
}

const UnitCellModel& UnitCellModel::default_model() {
  static const UnitCellModel model = from_json(nlohmann::json::parse(detail::kDefaultCellModelJson));
  return model;
}

UnitCellModel UnitCellModel::idealized(FrequencyBand span) {
  std::vector<ReflectionAnchor> off{{span.lo_hz, 0.0, 0.0}, {span.hi_hz, 0.0, 0.0}};
  std::vector<ReflectionAnchor> on{{span.lo_hz, 0.0, -180.0}, {span.hi_hz, 0.0, -180.0}};
  const double center = 0.5 * (span.lo_hz + span.hi_hz);
  return UnitCellModel(std::move(off), std::move(on), span, center);
}

UnitCellModel UnitCellModel::from_json(const nlohmann::json& doc) {
  try {
    std::vector<ReflectionAnchor> off;
    std::vector<ReflectionAnchor> on;
    bool have_off = false;
    bool have_on = false;
    for (const auto& entry : doc.at("states")) {
      const std::string state = entry.at("state").get<std::string>();
      std::vector<ReflectionAnchor> anchors;
      for (const auto& a : entry.at("anchors")) {
        anchors.push_back({a.at("freq_hz").get<double>(), a.at("mag_db").get<double>(), a.at("phase_deg").get<double>()});
      }
      if (state == "OFF" && !have_off) {
        off = std::move(anchors);
        have_off = true;
      } else if (state == "ON" && !have_on) {
        on = std::move(anchors);
        have_on = true;
      } else {
        throw Error(ErrorCode::kParse, "unexpected or duplicate state entry", {{"state", state}});
      }
    }
    if (!have_off || !have_on) {
      throw Error(ErrorCode::kParse, "model needs one OFF and one ON anchor table");
    }
    FrequencyBand band = kDefaultDesignBand;
    if (doc.contains("design_band_hz")) {
      band = {doc["design_band_hz"].at(0).get<double>(), doc["design_band_hz"].at(1).get<double>()};
    }
    const double center = doc.value("center_frequency_hz", kDefaultCenterFrequencyHz);
    return UnitCellModel(std::move(off), std::move(on), band, center);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed cell model: ") + e.what());
  }
}

UnitCellModel UnitCellModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open cell model file", {{"path", path.string()}});
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("cell model is not valid JSON: ") + e.what(), {{"path", path.string()}});
  }
  return from_json(doc);
}

nlohmann::json UnitCellModel::to_json() const {
  auto states = nlohmann::json::array();
  for (PinState s : {PinState::kOff, PinState::kOn}) {
    auto anchors_json = nlohmann::json::array();
    for (const auto& a : curve(s).raw) {
      anchors_json.push_back({{"freq_hz", a.freq_hz}, {"mag_db", a.mag_db}, {"phase_deg", a.phase_deg}});
    }
    states.push_back({{"state", std::string(to_string(s))}, {"anchors", anchors_json}});
  }
  return {{"schema_version", 1},
          {"design_band_hz", {design_band_.lo_hz, design_band_.hi_hz}},
          {"center_frequency_hz", center_frequency_hz_},
          {"states", states}};
}

FrequencyBand UnitCellModel::span(PinState state) const {
  const auto& c = curve(state);
  return {c.freq_hz.front(), c.freq_hz.back()};
}

std::span<const ReflectionAnchor> UnitCellModel::anchors(PinState state) const { return curve(state).raw; }

std::size_t UnitCellModel::segment(const Curve& c, double f_hz, PinState state) const {
  if (!(f_hz >= c.freq_hz.front() && f_hz <= c.freq_hz.back())) {
    auto ctx = span_context(span(state), f_hz);
    ctx["state"] = std::string(to_string(state));
    throw Error(ErrorCode::kOutOfRange, "frequency outside the anchor span", ctx);
  }
  const auto it = std::upper_bound(c.freq_hz.begin(), c.freq_hz.end(), f_hz);
  return static_cast<std::size_t>(std::distance(c.freq_hz.begin(), it)) - 1;
}

double UnitCellModel::magnitude_db(PinState state, double f_hz) const {
  const auto& c = curve(state);
  const std::size_t i = segment(c, f_hz, state);
  if (i + 1 == c.freq_hz.size()) return c.mag_db[i];
  const double t = (f_hz - c.freq_hz[i]) / (c.freq_hz[i + 1] - c.freq_hz[i]);
  return c.mag_db[i] + t * (c.mag_db[i + 1] - c.mag_db[i]);
}

double UnitCellModel::unwrapped_phase_deg(PinState state, double f_hz) const {
  const auto& c = curve(state);
  const std::size_t i = segment(c, f_hz, state);
  if (i + 1 == c.freq_hz.size()) return c.phase_deg[i];
  const double t = (f_hz - c.freq_hz[i]) / (c.freq_hz[i + 1] - c.freq_hz[i]);
  return c.phase_deg[i] + t * (c.phase_deg[i + 1] - c.phase_deg[i]);
}

std::complex<double> UnitCellModel::reflection(PinState state, double f_hz) const {
  const double magnitude = std::pow(10.0, magnitude_db(state, f_hz) / 20.0);
  const double phase_rad = unwrapped_phase_deg(state, f_hz) * std::numbers::pi / 180.0;
  return std::polar(magnitude, phase_rad);
}

double UnitCellModel::phase_difference_deg(double f_hz) const {
  const double diff = unwrapped_phase_deg(PinState::kOn, f_hz) - unwrapped_phase_deg(PinState::kOff, f_hz);
  return std::fmod(diff, 360.0);
}

BandReport validate_band(const UnitCellModel& model, FrequencyBand band, double mag_floor_db,
                         double phase_center_deg, double phase_tol_deg, std::size_t n_grid) {
  if (n_grid < 2) {
    throw Error(ErrorCode::kInvalidArgument, "validate_band needs n_grid >= 2", {{"n_grid", n_grid}});
  }
  if (!(band.lo_hz <= band.hi_hz)) {
    throw Error(ErrorCode::kInvalidArgument, "band must satisfy lo <= hi", {{"lo_hz", band.lo_hz}, {"hi_hz", band.hi_hz}});
  }
  for (PinState s : {PinState::kOff, PinState::kOn}) {
    const FrequencyBand sp = model.span(s);
    if (band.lo_hz < sp.lo_hz || band.hi_hz > sp.hi_hz) {
      throw Error(ErrorCode::kOutOfRange, "band outside the anchor span",
                  {{"state", std::string(to_string(s))},
                   {"band_lo_hz", band.lo_hz},
                   {"band_hi_hz", band.hi_hz},
                   {"span_lo_hz", sp.lo_hz},
                   {"span_hi_hz", sp.hi_hz}});
    }
  }

  BandReport report;
  report.min_magnitude_db_off = std::numeric_limits<double>::infinity();
  report.min_magnitude_db_on = std::numeric_limits<double>::infinity();
  double dev_min = std::numeric_limits<double>::infinity();
  double dev_max = -std::numeric_limits<double>::infinity();
  const double step = (band.hi_hz - band.lo_hz) / static_cast<double>(n_grid - 1);
  for (std::size_t i = 0; i < n_grid; ++i) {
    const double f = (i + 1 == n_grid) ? band.hi_hz : band.lo_hz + static_cast<double>(i) * step;
    report.min_magnitude_db_off = std::min(report.min_magnitude_db_off, model.magnitude_db(PinState::kOff, f));
    report.min_magnitude_db_on = std::min(report.min_magnitude_db_on, model.magnitude_db(PinState::kOn, f));
    const double dev = wrap_deg(model.phase_difference_deg(f) - phase_center_deg);
    dev_min = std::min(dev_min, dev);
    dev_max = std::max(dev_max, dev);
  }
  report.phase_diff_min_deg = phase_center_deg + dev_min;
  report.phase_diff_max_deg = phase_center_deg + dev_max;
  report.pass = report.min_magnitude_db_off >= mag_floor_db && report.min_magnitude_db_on >= mag_floor_db &&
                dev_min >= -phase_tol_deg && dev_max <= phase_tol_deg;
  return report;
}

}  // namespace ris
