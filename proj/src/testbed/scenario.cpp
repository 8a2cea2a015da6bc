#include "ris/testbed/scenario.hpp"

#include <fstream>

#include "ris/control/partition.hpp"
#include "ris/error.hpp"

namespace ris::testbed {

namespace {

Vec3 read_position(const nlohmann::json& j) {
  if (j.is_array()) return vec3_from_json(j);
  return polar_position(j.at("distance_m").get<double>(), j.value("theta_deg", 0.0), j.value("phi_deg", 0.0));
}

[[noreturn]] void violation(const std::string& message, nlohmann::json context = nlohmann::json::object()) {
  throw Error(ErrorCode::kScenarioViolation, message, std::move(context));
}

}  // namespace

Vec3 polar_position(double distance_m, double theta_deg, double phi_deg) {
  return distance_m * Direction{theta_deg, phi_deg}.unit();
}

Scenario Scenario::default_scenario() {
  Scenario s;
  s.placement.tx_pos = polar_position(1.0, 0.0, 0.0);
  s.placement.rx_pos = polar_position(2.0, 20.0, 90.0);
  s.f_grid_hz = linspace(3.3e9, 4.0e9, 141);
  return s;
}

Scenario Scenario::from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  Scenario s = default_scenario();
  try {
    const int version = doc.value("schema_version", kScenarioSchemaVersion);
    if (version != kScenarioSchemaVersion) {
      violation("unsupported scenario schema_version", {{"schema_version", version}});
    }
    if (doc.contains("geometry")) s.geometry = ArrayGeometry::from_json(doc["geometry"]);
    if (doc.contains("placement")) {
      const auto& p = doc["placement"];
      if (p.contains("tx_pos_m")) s.placement.tx_pos = vec3_from_json(p["tx_pos_m"]);
      if (p.contains("tx")) s.placement.tx_pos = read_position(p["tx"]);
      if (p.contains("rx_pos_m")) s.placement.rx_pos = vec3_from_json(p["rx_pos_m"]);
      if (p.contains("rx")) s.placement.rx_pos = read_position(p["rx"]);
    }
    if (doc.contains("model")) {
      const auto& m = doc["model"];
      if (m.is_string() && m.get<std::string>() == "default") {
        s.model = UnitCellModel::default_model();
        s.default_model = true;
      } else if (m.is_string()) {
        std::filesystem::path path = m.get<std::string>();
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        s.model = UnitCellModel::load(path);
        s.default_model = false;
      } else {
        s.model = UnitCellModel::from_json(m);
        s.default_model = false;
      }
    }
    s.f_probe_hz = doc.value("f_probe_hz", s.f_probe_hz);
    if (doc.contains("f_grid_hz")) {
      const auto& g = doc["f_grid_hz"];
      if (g.is_array()) {
        s.f_grid_hz = g.get<std::vector<double>>();
      } else {
        s.f_grid_hz = linspace(g.at("start").get<double>(), g.at("stop").get<double>(), g.at("points").get<std::size_t>());
      }
    }
    s.offset_db = doc.value("offset_db", s.offset_db);
    s.noise_sigma_db = doc.value("noise_sigma_db", s.noise_sigma_db);
    s.seed = doc.value("seed", s.seed);
    if (doc.contains("reference_gain") && !doc["reference_gain"].is_null()) {
      const auto& r = doc["reference_gain"];
      if (r.is_string()) {
        if (r.get<std::string>() != "baseline") violation("reference_gain must be a number or \"baseline\"");
        s.reference_gain.reset();
      } else {
        s.reference_gain = r.get<double>();
      }
    }
    if (doc.contains("engine")) s.engine = EngineOptions::from_json(doc["engine"]);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed scenario: ") + e.what());
  }
  s.validate();
  return s;
}

Scenario Scenario::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open scenario file", {{"path", path.string()}});
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("scenario is not valid JSON: ") + e.what(), {{"path", path.string()}});
  }
  return from_json(doc, path.parent_path());
}

nlohmann::json Scenario::to_json() const {
  nlohmann::json j;
  j["schema_version"] = kScenarioSchemaVersion;
  j["geometry"] = geometry.to_json();
  j["placement"] = {{"tx_pos_m", ris::to_json(placement.tx_pos)}, {"rx_pos_m", ris::to_json(placement.rx_pos)}};
  j["model"] = default_model ? nlohmann::json("default") : model.to_json();
  j["f_probe_hz"] = f_probe_hz;
  j["f_grid_hz"] = f_grid_hz;
  j["offset_db"] = offset_db;
  j["noise_sigma_db"] = noise_sigma_db;
  j["seed"] = seed;
  j["reference_gain"] = reference_gain ? nlohmann::json(*reference_gain) : nlohmann::json("baseline");
  j["engine"] = engine.to_json();
  return j;
}

void Scenario::validate() const {
  try {
    control::require_partitionable(geometry);
    placement.validate();
  } catch (const Error& e) {
    violation(e.what(), e.context());
  }
  for (PinState st : {PinState::kOff, PinState::kOn}) {
    const FrequencyBand span = model.span(st);
    auto outside = [&](double f) { return f < span.lo_hz || f > span.hi_hz; };
    if (outside(f_probe_hz)) {
      violation("probe frequency outside the cell model span", {{"f_probe_hz", f_probe_hz}});
    }
    for (double f : f_grid_hz) {
      if (outside(f)) violation("sweep frequency outside the cell model span", {{"freq_hz", f}});
    }
  }
  if (f_grid_hz.empty()) violation("frequency grid is empty");
  if (!(noise_sigma_db >= 0.0)) violation("noise_sigma_db must be >= 0", {{"noise_sigma_db", noise_sigma_db}});
  if (reference_gain && !(*reference_gain > 0.0)) {
    violation("reference_gain must be positive", {{"reference_gain", *reference_gain}});
  }
  if (engine.plane_wave_feed && placement.tx_pos.norm() == 0.0) violation("plane-wave feed needs a direction");
}

}  // namespace ris::testbed
