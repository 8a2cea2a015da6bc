#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "ris/testbed/service.hpp"

namespace ris::testbed {
namespace {

using nlohmann::json;

class ServiceTest : public ::testing::Test {
 protected:
  ServiceTest() : testbed_(Scenario::default_scenario()), service_(testbed_, {"127.0.0.1", 0, {}}) {
    port_ = service_.start();
  }

  httplib::Client client() {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10, 0);
    return c;
  }

  static json body_of(const httplib::Result& r) { return json::parse(r->body); }

  Testbed testbed_;
  Service service_;
  int port_ = 0;
};

struct SseEvent {
  std::string event;
  json data;
};

std::vector<SseEvent> parse_sse(const std::string& text) {
  std::vector<SseEvent> events;
  std::istringstream in(text);
  SseEvent cur;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) {
      if (!cur.data.is_null()) events.push_back(cur);
      cur = {};
    } else if (line.rfind("event: ", 0) == 0) {
      cur.event = line.substr(7);
    } else if (line.rfind("data: ", 0) == 0) {
      cur.data = json::parse(line.substr(6));
    }
  }
  return events;
}

TEST(ServiceStatus, ErrorCodeMapping) {
  EXPECT_EQ(http_status(ErrorCode::kBusy), 409);
  EXPECT_EQ(http_status(ErrorCode::kParse), 400);
  EXPECT_EQ(http_status(ErrorCode::kDimensionMismatch), 400);
  EXPECT_EQ(http_status(ErrorCode::kScenarioViolation), 422);
  EXPECT_EQ(http_status(ErrorCode::kMeasurementFailed), 500);
}

TEST(ServiceStatus, RoutesAreUnique) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : service_routes()) EXPECT_TRUE(seen.insert({r.method, r.path}).second) << r.path;
  EXPECT_EQ(seen.size(), 9U);
}

TEST_F(ServiceTest, GetScenario) {
  auto r = client().Get("/scenario");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(body_of(r), Scenario::default_scenario().to_json());
}

TEST_F(ServiceTest, SteerMatchesCodebook) {
  auto r = client().Post("/steer", R"({"theta_deg":30,"phi_deg":0})", "application/json");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  const auto s = Scenario::default_scenario();
  const auto want = quantize_codebook(ideal_element_phase_deg(s.geometry, s.placement.tx_pos, {30, 0}, s.f_probe_hz),
                                      s.model, s.f_probe_hz);
  const json j = body_of(r);
  EXPECT_EQ(j.at("config_hex"), want.to_hex());
  EXPECT_EQ(j.at("theta_deg"), 30.0);
  EXPECT_TRUE(j.at("power_db").is_number());
  EXPECT_EQ(testbed_.snapshot()->config, want);
}

TEST_F(ServiceTest, BlocksCensus) {
  auto r = client().Get("/blocks");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200);
  const json j = body_of(r);
  ASSERT_EQ(j.at("blocks").size(), 2U);
  EXPECT_EQ(j["blocks"][0]["address"], 0);
  EXPECT_EQ(j["blocks"][0]["mode"], "master");
  EXPECT_EQ(j["blocks"][1]["address"], 1);
  EXPECT_EQ(j["blocks"][1]["mode"], "slave");
  EXPECT_EQ(j.at("status"), "idle");
  EXPECT_EQ(j.at("power_db"), 24.0);
}

TEST_F(ServiceTest, ConfigRoundTripAndErrors) {
  const auto cfg = PhaseConfig(8, 16).complement();
  auto ok = client().Post("/config", json{{"config_hex", cfg.to_hex()}}.dump(), "application/json");
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->status, 200);
  EXPECT_EQ(body_of(ok).at("config_hex"), cfg.to_hex());
  EXPECT_EQ(body_of(ok).at("report").at("ok"), true);

  auto short_hex = client().Post("/config", R"({"config_hex":"FFFF"})", "application/json");
  ASSERT_TRUE(short_hex);
  EXPECT_EQ(short_hex->status, 400);
  EXPECT_EQ(body_of(short_hex).at("code"), "DIMENSION_MISMATCH");

  auto garbage = client().Post("/config", "{not json", "application/json");
  ASSERT_TRUE(garbage);
  EXPECT_EQ(garbage->status, 400);
  EXPECT_EQ(body_of(garbage).at("code"), "PARSE_ERROR");

  auto missing = client().Post("/config", "{}", "application/json");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 400);
}

TEST_F(ServiceTest, BusyWhileRunHoldsLease) {
  auto lease = testbed_.acquire(RunStatus::kOptimizing);
  auto c = client();
  auto cfg = c.Post("/config", json{{"config_hex", PhaseConfig(8, 16).to_hex()}}.dump(), "application/json");
  ASSERT_TRUE(cfg);
  EXPECT_EQ(cfg->status, 409);
  EXPECT_EQ(body_of(cfg).at("code"), "BUSY");
  auto opt = c.Post("/optimize", "{}", "application/json");
  ASSERT_TRUE(opt);
  EXPECT_EQ(opt->status, 409);
  auto sweep = c.Post("/sweep", json{{"config_a_hex", PhaseConfig(8, 16).to_hex()}}.dump(), "application/json");
  ASSERT_TRUE(sweep);
  EXPECT_EQ(sweep->status, 409);
  auto blocks = c.Get("/blocks");
  ASSERT_TRUE(blocks);
  EXPECT_EQ(blocks->status, 200);
  EXPECT_EQ(body_of(blocks).at("status"), "optimizing");
}

TEST_F(ServiceTest, BadScenarioRejected) {
  json bad = Scenario::default_scenario().to_json();
  bad["f_probe_hz"] = 9e9;
  auto r = client().Put("/scenario", bad.dump(), "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 422);
  EXPECT_EQ(body_of(r).at("code"), "SCENARIO_VIOLATION");
  EXPECT_EQ(testbed_.snapshot()->scenario->f_probe_hz, 3.75e9);
}

TEST_F(ServiceTest, PutScenarioRebuilds) {
  json s = Scenario::default_scenario().to_json();
  s["offset_db"] = 30.0;
  auto r = client().Put("/scenario", s.dump(), "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(*testbed_.snapshot()->power_db, 30.0);
}

TEST_F(ServiceTest, OptimizeStreamsTraceThenDone) {
  auto c = client();
  auto start = c.Post("/optimize", R"({"passes":2,"element_order":"row-major"})", "application/json");
  ASSERT_TRUE(start);
  ASSERT_EQ(start->status, 202) << start->body;
  EXPECT_EQ(body_of(start).at("passes"), 2);

  auto stream = c.Get("/trace");
  ASSERT_TRUE(stream);
  EXPECT_EQ(stream->status, 200);
  const auto events = parse_sse(stream->body);
  ASSERT_FALSE(events.empty());
  const auto& done = events.back();
  EXPECT_EQ(done.event, "done");
  EXPECT_TRUE(done.data.at("error").is_null());
  service_.wait_for_run();

  const auto trace = testbed_.trace_stream().trace();
  ASSERT_EQ(events.size() - 1, trace.entries.size());
  for (std::size_t i = 0; i < trace.entries.size(); ++i) {
    EXPECT_EQ(events[i].event, "");
    EXPECT_EQ(events[i].data, trace.entries[i].to_json());
  }
  EXPECT_EQ(done.data.at("entries"), trace.entries.size());
  const auto snap = testbed_.snapshot();
  EXPECT_EQ(done.data.at("final_config_hex"), snap->final_config->to_hex());
  EXPECT_EQ(done.data.at("power_db"), *snap->power_db);

  auto tail = c.Get("/trace?from=5");
  ASSERT_TRUE(tail);
  EXPECT_EQ(parse_sse(tail->body).size(), trace.entries.size() - 5 + 1);
  auto bad = c.Get("/trace?from=x");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
}

TEST_F(ServiceTest, SweepDefaultsToAllOffBaseline) {
  const auto cfg = PhaseConfig(8, 16).complement();
  auto r = client().Post("/sweep", json{{"config_a_hex", cfg.to_hex()}}.dump(), "application/json");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  const json j = body_of(r);
  const auto direct = testbed_.run_sweep(cfg, PhaseConfig(8, 16)).to_json();
  EXPECT_EQ(j, direct);
}

TEST_F(ServiceTest, PatternFollowsAppliedConfig) {
  auto c = client();
  c.Post("/steer", R"({"theta_deg":-20})", "application/json");
  auto r = c.Get("/pattern?theta_min=-60&theta_max=60&n=241");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  const json j = body_of(r);
  const auto snap = testbed_.snapshot();
  EXPECT_EQ(j.at("config_hex"), snap->config.to_hex());
  EXPECT_EQ(j.at("version"), snap->version);
  ASSERT_EQ(j.at("points").size(), 241U);
  const auto direct = testbed_.pattern(-60, 60, 241, 0);
  for (std::size_t i = 0; i < direct.size(); ++i) {
    EXPECT_EQ(j["points"][i]["power_db"].get<double>(), direct[i].power_db);
  }
  auto bad = c.Get("/pattern?n=0");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
}

}  // namespace
}  // namespace ris::testbed
