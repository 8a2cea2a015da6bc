#include "ris/testbed/service.hpp"

#include <mutex>
#include <thread>

#include <httplib.h>

namespace ris::testbed {

namespace {

using nlohmann::json;

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json doc = json::parse(req.body);
  if (!doc.is_object()) throw Error(ErrorCode::kParse, "request body must be a JSON object");
  return doc;
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) { send_json(res, e.to_json(), http_status(e.code())); }

template <class F>
httplib::Server::Handler guarded(F handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_error(res, Error(ErrorCode::kParse, e.what()));
    } catch (const std::exception& e) {
      send_json(res, {{"code", "INTERNAL"}, {"message", e.what()}, {"context", json::object()}}, 500);
    }
  };
}

double query_double(const httplib::Request& req, const std::string& key, double fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string text = req.get_param_value(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kParse, "query parameter is not a number", {{"param", key}, {"value", text}});
}

OptimizerSettings settings_from_json(const json& body) {
  OptimizerSettings s;
  const auto passes = body.value("passes", static_cast<long long>(s.passes));
  if (passes < 0) throw Error(ErrorCode::kInvalidArgument, "passes must be >= 0", {{"passes", passes}});
  s.passes = static_cast<std::size_t>(passes);
  s.epsilon_db = body.value("epsilon_db", s.epsilon_db);
  if (!(s.epsilon_db >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon_db must be >= 0");
  s.order = element_order_from_string(body.value("element_order", std::string(to_string(s.order))));
  s.seed = body.value("seed", s.seed);
  return s;
}

PhaseConfig config_field(const json& body, const char* key, const Scenario& scenario) {
  if (!body.contains(key)) throw Error(ErrorCode::kParse, "missing field", {{"field", key}});
  return PhaseConfig::from_hex(body.at(key).get<std::string>(), scenario.geometry.rows(), scenario.geometry.cols());
}

std::string sse(const std::string& event, const json& data) {
  std::string out;
  if (!event.empty()) out += "event: " + event + "\n";
  out += "data: " + data.dump() + "\n\n";
  return out;
}

}  // namespace

const std::vector<RouteInfo>& service_routes() {
  static const std::vector<RouteInfo> routes = {
      {"GET", "/scenario", "scenario", "current scenario"},
      {"PUT", "/scenario", "scenario", "replace the scenario (idle only)"},
      {"POST", "/config", "apply", "apply a global config through the block chain"},
      {"POST", "/steer", "steer", "apply the codebook for a target direction"},
      {"POST", "/optimize", "optimize", "start a greedy optimization run"},
      {"GET", "/trace", "optimize", "server-sent events, one per probe"},
      {"POST", "/sweep", "sweep", "frequency sweep of two configs"},
      {"GET", "/pattern", "pattern", "radiation pattern of the applied config"},
      {"GET", "/blocks", "blocks", "block census and applied config"},
  };
  return routes;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBusy:
      return 409;
    case ErrorCode::kParse:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kInvalidArgument:
      return 400;
    case ErrorCode::kScenarioViolation:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kDegenerateGeometry:
    case ErrorCode::kBudgetExceeded:
      return 422;
    default:
      return 500;
  }
}

json blocks_view(const Snapshot& snap) {
  auto blocks = json::array();
  for (const auto& b : snap.blocks) blocks.push_back(b.to_json());
  return {{"blocks", blocks},
          {"config_hex", snap.config.to_hex()},
          {"power_db", snap.power_db ? json(*snap.power_db) : json(nullptr)},
          {"status", std::string(to_string(snap.status))},
          {"version", snap.version}};
}

json pattern_view(const Snapshot& snap, std::span<const PatternPoint> pattern, double phi_deg) {
  auto points = json::array();
  for (const auto& p : pattern) points.push_back({{"theta_deg", p.theta_deg}, {"power_db", p.power_db}});
  return {{"phi_deg", phi_deg}, {"config_hex", snap.config.to_hex()}, {"version", snap.version}, {"points", points}};
}

struct Service::Impl {
  Testbed& testbed;
  ServiceOptions options;
  httplib::Server server;
  std::thread listener;
  std::mutex worker_mutex;
  std::thread worker;
  int port = -1;

  Impl(Testbed& tb, ServiceOptions opts) : testbed(tb), options(std::move(opts)) { routes(); }

  void join_worker() {
    std::lock_guard lock(worker_mutex);
    if (worker.joinable()) worker.join();
  }

  void routes() {
    server.Get("/scenario", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, testbed.snapshot()->scenario->to_json());
    }));

    server.Put("/scenario", guarded([this](const httplib::Request& req, httplib::Response& res) {
      testbed.replace_scenario(Scenario::from_json(parse_body(req), options.scenario_dir));
      send_json(res, testbed.snapshot()->scenario->to_json());
    }));

    server.Post("/config", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const auto config = config_field(body, "config_hex", *testbed.snapshot()->scenario);
      send_json(res, testbed.apply(config).to_json());
    }));

    server.Post("/steer", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const Direction target{body.at("theta_deg").get<double>(), body.value("phi_deg", 0.0)};
      json out = testbed.steer(target).to_json();
      out["theta_deg"] = target.theta_deg;
      out["phi_deg"] = target.phi_deg;
      send_json(res, out);
    }));

    server.Post("/optimize", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const OptimizerSettings settings = settings_from_json(parse_body(req));
      Testbed::Lease lease = testbed.acquire(RunStatus::kOptimizing);
      std::lock_guard lock(worker_mutex);
      if (worker.joinable()) worker.join();
      worker = std::thread([this, settings, lease = std::move(lease)]() mutable {
        try {
          testbed.run_optimization(lease, settings);
        } catch (const std::exception&) {
          // Reported to /trace readers through the stream's error field.
        }
      });
      send_json(res, {{"started", true}, {"passes", settings.passes}, {"epsilon_db", settings.epsilon_db},
                      {"element_order", std::string(to_string(settings.order))}, {"seed", settings.seed}},
                202);
    }));

    server.Get("/trace", [this](const httplib::Request& req, httplib::Response& res) {
      auto next = std::make_shared<std::size_t>(0);
      if (req.has_param("from")) {
        try {
          *next = std::stoul(req.get_param_value("from"));
        } catch (const std::exception&) {
          send_error(res, Error(ErrorCode::kParse, "query parameter is not an index", {{"param", "from"}}));
          return;
        }
      }
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider("text/event-stream", [this, next](std::size_t, httplib::DataSink& sink) {
        const auto chunk = testbed.trace_stream().read_from(*next, std::chrono::milliseconds(200));
        *next = chunk.next;
        for (const auto& e : chunk.entries) {
          const std::string msg = sse("", e.to_json());
          if (!sink.write(msg.data(), msg.size())) return false;
        }
        if (chunk.finished) {
          const auto snap = testbed.snapshot();
          json done = {{"entries", chunk.next},
                       {"error", chunk.error ? json(*chunk.error) : json(nullptr)},
                       {"config_hex", snap->config.to_hex()},
                       {"final_config_hex", snap->final_config ? json(snap->final_config->to_hex()) : json(nullptr)},
                       {"power_db", snap->power_db ? json(*snap->power_db) : json(nullptr)},
                       {"version", snap->version}};
          const std::string msg = sse("done", done);
          sink.write(msg.data(), msg.size());
          sink.done();
        }
        return true;
      });
    });

    server.Post("/sweep", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const auto scenario = testbed.snapshot()->scenario;
      const auto a = config_field(body, "config_a_hex", *scenario);
      const auto b = body.contains("config_b_hex") ? config_field(body, "config_b_hex", *scenario)
                                                   : PhaseConfig::all_off(scenario->geometry);
      send_json(res, testbed.run_sweep(a, b).to_json());
    }));

    server.Get("/pattern", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const double lo = query_double(req, "theta_min", -90.0);
      const double hi = query_double(req, "theta_max", 90.0);
      const double n = query_double(req, "n", 721.0);
      const double phi = query_double(req, "phi", 0.0);
      if (!(n >= 1.0) || n != static_cast<double>(static_cast<std::size_t>(n))) {
        throw Error(ErrorCode::kInvalidArgument, "n must be a positive integer", {{"n", n}});
      }
      const auto snap = testbed.snapshot();
      const Scenario& s = *snap->scenario;
      if (!(lo <= hi)) throw Error(ErrorCode::kInvalidArgument, "theta_min must not exceed theta_max");
      const auto grid = linspace(lo, hi, static_cast<std::size_t>(n));
      const auto pattern =
          radiation_pattern(s.geometry, snap->config, s.model, s.placement.tx_pos, s.f_probe_hz, grid, phi, s.engine);
      send_json(res, pattern_view(*snap, pattern, phi));
    }));

    server.Get("/blocks", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, blocks_view(*testbed.snapshot()));
    }));
  }
};

Service::Service(Testbed& testbed, ServiceOptions options)
    : impl_(std::make_unique<Impl>(testbed, std::move(options))) {}

Service::~Service() {
  stop();
  impl_->join_worker();
}

int Service::bind() {
  if (impl_->port >= 0) return impl_->port;
  if (impl_->options.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(impl_->options.host);
  } else if (impl_->server.bind_to_port(impl_->options.host, impl_->options.port)) {
    impl_->port = impl_->options.port;
  }
  if (impl_->port < 0) {
    throw Error(ErrorCode::kIo, "cannot bind listening socket",
                {{"host", impl_->options.host}, {"port", impl_->options.port}});
  }
  return impl_->port;
}

void Service::run() { impl_->server.listen_after_bind(); }

int Service::start() {
  const int port = bind();
  impl_->listener = std::thread([this] { run(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::stop() {
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
}

void Service::wait_for_run() { impl_->join_worker(); }

}  // namespace ris::testbed
