#include "ris/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ris/control/frame.hpp"
#include "ris/error.hpp"
#include "ris/testbed/service.hpp"

namespace ris::cli {

namespace {

using nlohmann::json;
using testbed::Scenario;
using testbed::Testbed;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open file", {{"path", path}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write file", {{"path", path}});
  return out;
}

Scenario load_scenario(const std::string& path) {
  return path.empty() ? Scenario::default_scenario() : Scenario::load(path);
}

// "off" (or "all-off") is the all-OFF config; anything else is a hex file.
PhaseConfig load_config(const std::string& source, const Scenario& s) {
  if (source == "off" || source == "all-off") return PhaseConfig::all_off(s.geometry);
  return PhaseConfig::from_hex(read_file(source), s.geometry.rows(), s.geometry.cols());
}

FrequencyBand parse_band(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon != std::string::npos) {
      std::size_t a = 0, b = 0;
      const std::string lo = text.substr(0, colon), hi = text.substr(colon + 1);
      FrequencyBand band{std::stod(lo, &a), std::stod(hi, &b)};
      if (a == lo.size() && b == hi.size()) return band;
    }
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kParse, "band must look like LO:HI in Hz", {{"band", text}});
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
  return parts;
}

void print_json(std::ostream& out, const json& doc) { out << doc.dump(2) << "\n"; }

struct Options {
  std::string scenario;
  std::string model = "default";
  std::string band = "3.7e9:3.8e9";
  double floor_db = -3.0;
  double center_deg = 180.0;
  double tol_deg = 20.0;
  std::size_t grid_points = 1001;
  double theta = 0.0;
  double phi = 0.0;
  double theta_min = -90.0;
  double theta_max = 90.0;
  double step = 0.25;
  std::string config = "off";
  std::string baseline = "off";
  std::string out;
  std::size_t passes = 1;
  double epsilon_db = 0.0;
  std::string order = "row-major";
  std::uint64_t seed = 0;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string artifacts;
  std::string dest = "0";
  std::string opcode = "PING";
  std::string payload;
  std::string frame_hex;
  bool bus_log = false;
  std::string command;
};

int cmd_cell_validate(const Options& o, std::ostream& out) {
  const UnitCellModel model = o.model == "default" ? UnitCellModel::default_model() : UnitCellModel::load(o.model);
  const BandReport report = validate_band(model, parse_band(o.band), o.floor_db, o.center_deg, o.tol_deg, o.grid_points);
  print_json(out, report.to_json());
  return report.pass ? kExitOk : kExitCheckFailed;
}

int cmd_codebook(const Options& o, std::ostream& out) {
  Testbed tb(load_scenario(o.scenario));
  const PhaseConfig cb = tb.codebook({o.theta, o.phi});
  if (o.out.empty()) {
    out << cb.to_hex_lines();
  } else {
    open_out(o.out) << cb.to_hex_lines();
    print_json(out, {{"theta_deg", o.theta}, {"phi_deg", o.phi}, {"rows", cb.rows()}, {"cols", cb.cols()},
                     {"config_hex", cb.to_hex()}});
  }
  return kExitOk;
}

int cmd_pattern(const Options& o, std::ostream& out) {
  if (!(o.step > 0.0) || !(o.theta_min <= o.theta_max)) {
    throw Error(ErrorCode::kInvalidArgument, "pattern grid needs step > 0 and theta-min <= theta-max");
  }
  Testbed tb(load_scenario(o.scenario));
  tb.apply(load_config(o.config, *tb.snapshot()->scenario));
  const auto n = static_cast<std::size_t>(std::llround((o.theta_max - o.theta_min) / o.step)) + 1;
  const auto pattern = tb.pattern(o.theta_min, o.theta_max, n, o.phi);
  if (o.out.empty()) {
    testbed::write_pattern_csv(out, pattern);
    return kExitOk;
  }
  auto file = open_out(o.out);
  testbed::write_pattern_csv(file, pattern);
  const auto peak = std::max_element(pattern.begin(), pattern.end(),
                                     [](const auto& a, const auto& b) { return a.power_db < b.power_db; });
  print_json(out, {{"points", pattern.size()}, {"peak_theta_deg", peak->theta_deg}, {"phi_deg", o.phi}});
  return kExitOk;
}

int cmd_apply(const Options& o, std::ostream& out) {
  Testbed tb(load_scenario(o.scenario));
  if (o.bus_log) tb.chain_for_testing().set_bus_logging(true);
  const auto result = tb.apply(load_config(o.config, *tb.snapshot()->scenario));
  print_json(out, result.to_json());
  if (o.bus_log && !o.out.empty()) {
    auto file = open_out(o.out);
    tb.chain().write_bus_log(file);
  }
  return kExitOk;
}

int cmd_steer(const Options& o, std::ostream& out) {
  Testbed tb(load_scenario(o.scenario));
  json doc = tb.steer({o.theta, o.phi}).to_json();
  doc["theta_deg"] = o.theta;
  doc["phi_deg"] = o.phi;
  print_json(out, doc);
  return kExitOk;
}

int cmd_optimize(const Options& o, std::ostream& out) {
  const auto outs = split_commas(o.out);
  if (outs.size() > 2) throw Error(ErrorCode::kInvalidArgument, "--out takes TRACE.csv[,FINAL.hex]", {{"out", o.out}});
  Testbed tb(load_scenario(o.scenario));
  OptimizerSettings settings;
  settings.passes = o.passes;
  settings.epsilon_db = o.epsilon_db;
  settings.order = element_order_from_string(o.order);
  settings.seed = o.seed;
  const PowerTrace trace = tb.run_optimization(settings);
  const auto snap = tb.snapshot();
  if (!outs.empty() && !outs[0].empty()) {
    auto file = open_out(outs[0]);
    trace.write_csv(file);
  }
  if (outs.size() == 2 && !outs[1].empty()) open_out(outs[1]) << snap->final_config->to_hex_lines();

  std::size_t accepted = 0;
  for (const auto& e : trace.entries) accepted += e.accepted ? 1 : 0;
  print_json(out, {{"probes", trace.entries.size()},
                   {"accepted", accepted},
                   {"baseline_db", trace.entries.front().power_db},
                   {"final_db", snap->power_db ? json(*snap->power_db) : json(nullptr)},
                   {"improvement_db", improvement_db(trace)},
                   {"final_config_hex", snap->final_config->to_hex()}});
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  Testbed tb(load_scenario(o.scenario));
  const Scenario& s = *tb.snapshot()->scenario;
  const testbed::SweepTable table = tb.run_sweep(load_config(o.config, s), load_config(o.baseline, s));
  if (o.out.empty()) {
    table.write_csv(out);
    return kExitOk;
  }
  auto file = open_out(o.out);
  table.write_csv(file);

  const FrequencyBand band = s.model.design_band();
  double min_delta = INFINITY, sum = 0.0;
  std::size_t count = 0;
  for (const auto& p : table.points) {
    if (p.freq_hz < band.lo_hz || p.freq_hz > band.hi_hz) continue;
    min_delta = std::min(min_delta, p.delta_db());
    sum += p.delta_db();
    ++count;
  }
  json summary = {{"points", table.points.size()}, {"design_band_hz", {band.lo_hz, band.hi_hz}}};
  if (count > 0) {
    summary["design_band_min_delta_db"] = min_delta;
    summary["design_band_mean_delta_db"] = sum / static_cast<double>(count);
  }
  print_json(out, summary);
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out) {
  Testbed tb(load_scenario(o.scenario));
  if (!o.artifacts.empty()) tb.set_artifact_dir(std::filesystem::path(o.artifacts));
  testbed::ServiceOptions opts;
  opts.host = o.host;
  opts.port = o.port;
  if (!o.scenario.empty()) opts.scenario_dir = std::filesystem::path(o.scenario).parent_path();
  testbed::Service service(tb, opts);
  const int port = service.bind();
  out << json{{"listening", o.host}, {"port", port}}.dump() << std::endl;
  service.run();
  return kExitOk;
}

int cmd_frames_encode(const Options& o, std::ostream& out) {
  control::Frame frame;
  if (o.dest == "broadcast" || o.dest == "ff" || o.dest == "FF") {
    frame.dest = control::BlockAddress::broadcast();
  } else {
    unsigned value = 0;
    try {
      value = static_cast<unsigned>(std::stoul(o.dest, nullptr, 0));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "bad destination address", {{"dest", o.dest}});
    }
    frame.dest = control::BlockAddress(value);
  }
  const auto op = control::opcode_from_string(o.opcode);
  if (!op) throw Error(ErrorCode::kParse, "unknown opcode", {{"opcode", o.opcode}});
  frame.opcode = *op;
  frame.payload = hex_to_bytes(o.payload);
  out << bytes_to_hex(control::encode_frame(frame)) << "\n";
  return kExitOk;
}

int cmd_frames_decode(const Options& o, std::ostream& out) {
  const auto bytes = hex_to_bytes(o.frame_hex);
  const auto result = control::decode_frame(bytes);
  if (const auto* e = std::get_if<control::DecodeError>(&result)) {
    throw Error(ErrorCode::kParse, "frame rejected",
                {{"decode_error", std::string(control::to_string(*e))}, {"bytes", bytes.size()}});
  }
  const auto& f = std::get<control::Frame>(result);
  json doc = {{"version", f.version},
              {"dest", f.dest.value()},
              {"opcode", std::string(control::to_string(f.opcode))},
              {"payload_hex", bytes_to_hex(f.payload)}};
  if (auto r = control::parse_status_reply(f)) {
    doc["status_reply"] = {{"source", r->source.value()},
                           {"status", std::string(control::to_string(r->status))},
                           {"powered", r->powered},
                           {"surface_hex", bytes_to_hex(r->surface)}};
  } else if (auto p = control::parse_pong(f)) {
    doc["pong"] = {{"source", p->source.value()}, {"mode", std::string(control::to_string(p->mode))}};
  }
  print_json(out, doc);
  return kExitOk;
}

int cmd_scenario(const Options& o, std::ostream& out) {
  const Scenario s = load_scenario(o.scenario);
  s.validate();
  print_json(out, s.to_json());
  return kExitOk;
}

int cmd_blocks(const Options& o, std::ostream& out) {
  Testbed tb(load_scenario(o.scenario));
  if (o.config != "off") tb.apply(load_config(o.config, *tb.snapshot()->scenario));
  json doc = testbed::blocks_view(*tb.snapshot());
  if (!o.command.empty()) {
    const auto cmd = control::NorthboundCommand::from_json(json::parse(o.command), tb.chain().geometry());
    doc["report"] = tb.chain_for_testing().execute(cmd).to_json();
    auto blocks = json::array();
    for (const auto& b : tb.chain().blocks()) blocks.push_back(b.to_json());
    doc["blocks"] = blocks;
  }
  print_json(out, doc);
  return kExitOk;
}

using Handler = int (*)(const Options&, std::ostream&);

struct Command {
  CLI::App* app;
  Handler handler;
};

// Builds the command tree; `commands` receives every leaf.
void build(CLI::App& app, Options& o, std::vector<std::pair<std::string, Command>>& commands) {
  app.require_subcommand(1);
  auto add = [&](CLI::App* parent, const std::string& name, const std::string& path, const std::string& desc,
                 Handler h) {
    CLI::App* sub = parent->add_subcommand(name, desc);
    commands.push_back({path, {sub, h}});
    return sub;
  };
  auto scenario_opt = [&](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "scenario JSON (default: built-in two-block scenario)");
  };

  CLI::App* cell = app.add_subcommand("cell", "unit-cell model");
  cell->require_subcommand(1);
  auto* validate = add(cell, "validate", "cell validate", "check the design-band contract", cmd_cell_validate);
  validate->add_option("--model", o.model, "model JSON or 'default'");
  validate->add_option("--band", o.band, "LO:HI in Hz");
  validate->add_option("--floor-db", o.floor_db, "minimum magnitude, both states");
  validate->add_option("--center-deg", o.center_deg, "phase-difference window center");
  validate->add_option("--tol-deg", o.tol_deg, "phase-difference window half-width");
  validate->add_option("--grid", o.grid_points, "frequency samples across the band")->check(CLI::Range(2, 1000000));

  auto* codebook = add(&app, "codebook", "codebook", "quantized steering codebook", cmd_codebook);
  scenario_opt(codebook);
  codebook->add_option("--theta", o.theta, "target theta, deg")->required();
  codebook->add_option("--phi", o.phi, "target phi, deg");
  codebook->add_option("--out", o.out, "hex file (one row per line)");

  auto* pattern = add(&app, "pattern", "pattern", "radiation pattern of a config", cmd_pattern);
  scenario_opt(pattern);
  pattern->add_option("--config", o.config, "hex file or 'off'");
  pattern->add_option("--theta-min", o.theta_min);
  pattern->add_option("--theta-max", o.theta_max);
  pattern->add_option("--step", o.step, "theta step, deg");
  pattern->add_option("--phi", o.phi, "cut plane, deg");
  pattern->add_option("--out", o.out, "CSV theta_deg,power_db");

  auto* apply = add(&app, "apply", "apply", "apply a config through the block chain", cmd_apply);
  scenario_opt(apply);
  apply->add_option("--config", o.config, "hex file or 'off'");
  apply->add_flag("--bus-log", o.bus_log, "write bus traffic (JSON lines) to --out");
  apply->add_option("--out", o.out);

  auto* steer = add(&app, "steer", "steer", "apply the codebook for a direction", cmd_steer);
  scenario_opt(steer);
  steer->add_option("--theta", o.theta)->required();
  steer->add_option("--phi", o.phi);

  auto* optimize = add(&app, "optimize", "optimize", "closed-loop greedy optimization", cmd_optimize);
  scenario_opt(optimize);
  optimize->add_option("--passes", o.passes);
  optimize->add_option("--epsilon-db", o.epsilon_db)->check(CLI::NonNegativeNumber);
  optimize->add_option("--order", o.order, "row-major or random");
  optimize->add_option("--seed", o.seed);
  optimize->add_option("--out", o.out, "TRACE.csv[,FINAL.hex]");

  auto* sweep = add(&app, "sweep", "sweep", "frequency sweep against a baseline", cmd_sweep);
  scenario_opt(sweep);
  sweep->add_option("--config", o.config, "hex file or 'off'")->required();
  sweep->add_option("--baseline", o.baseline, "hex file or 'off'");
  sweep->add_option("--out", o.out, "CSV freq_hz,config_db,baseline_db,delta_db");

  auto* serve = add(&app, "serve", "serve", "run the HTTP service", cmd_serve);
  scenario_opt(serve);
  serve->add_option("--host", o.host);
  serve->add_option("--port", o.port)->check(CLI::Range(0, 65535));
  serve->add_option("--artifacts", o.artifacts, "directory for sweep CSVs");

  CLI::App* frames = app.add_subcommand("frames", "frame codec");
  frames->require_subcommand(1);
  auto* encode = add(frames, "encode", "frames encode", "build a frame", cmd_frames_encode);
  encode->add_option("--dest", o.dest, "0-15 or 'broadcast'");
  encode->add_option("--opcode", o.opcode, "SET_CONFIG, GET_STATUS, STATUS_REPLY, PING, PONG, RESET");
  encode->add_option("--payload", o.payload, "payload hex");
  auto* decode = add(frames, "decode", "frames decode", "parse a frame", cmd_frames_decode);
  decode->add_option("hex", o.frame_hex, "frame bytes as hex")->required();

  auto* scenario = add(&app, "scenario", "scenario", "print the normalized scenario", cmd_scenario);
  scenario_opt(scenario);

  auto* blocks = add(&app, "blocks", "blocks", "block census", cmd_blocks);
  scenario_opt(blocks);
  blocks->add_option("--config", o.config, "hex file or 'off'");
  blocks->add_option("--cmd", o.command, R"(north-bound command JSON, e.g. {"cmd":"ping"})");
}

}  // namespace

std::vector<std::string> command_names() {
  CLI::App app;
  Options o;
  std::vector<std::pair<std::string, Command>> commands;
  build(app, o, commands);
  std::vector<std::string> names;
  for (const auto& [name, cmd] : commands) names.push_back(name);
  return names;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("RIS digital twin", "ristwin");
  Options o;
  std::vector<std::pair<std::string, Command>> commands;
  build(app, o, commands);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << json{{"code", "USAGE"}, {"message", e.what()}, {"context", json::object()}}.dump() << "\n";
    return kExitUsage;
  }

  try {
    for (const auto& [name, cmd] : commands) {
      if (cmd.app->parsed()) return cmd.handler(o, out);
    }
  } catch (const Error& e) {
    err << e.to_json().dump() << "\n";
    return kExitError;
  } catch (const json::exception& e) {
    err << Error(ErrorCode::kParse, e.what()).to_json().dump() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << json{{"code", "INTERNAL"}, {"message", e.what()}, {"context", json::object()}}.dump() << "\n";
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace ris::cli
