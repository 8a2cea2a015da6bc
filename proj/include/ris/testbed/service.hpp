#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ris/error.hpp"
#include "ris/testbed/testbed.hpp"

namespace ris::testbed {

struct RouteInfo {
  std::string method;
  std::string path;
  std::string cli_equivalent;  // subcommand path, e.g. "frames decode"
  std::string summary;
};

/// Every north-bound endpoint with the CLI subcommand that performs the same
/// operation.
const std::vector<RouteInfo>& service_routes();

int http_status(ErrorCode code);

// Response bodies shared by the service and the CLI.
nlohmann::json blocks_view(const Snapshot& snap);
nlohmann::json pattern_view(const Snapshot& snap, std::span<const PatternPoint> pattern, double phi_deg);

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path scenario_dir;  // resolves relative model paths in PUT /scenario
};

/// JSON-over-HTTP front end for one Testbed. Optimization runs execute on a
/// worker thread; GET /trace streams their probes as server-sent events.
class Service {
 public:
  Service(Testbed& testbed, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket and returns the port.
  int bind();
  /// Serves until stop(); bind() first.
  void run();
  /// bind() + run() on a background thread.
  int start();
  void stop();

  /// Blocks until the current optimization worker (if any) finishes.
  void wait_for_run();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ris::testbed
