#include "ris/testbed/testbed.hpp"

#include <cstdio>
#include <fstream>

#include "ris/error.hpp"

namespace ris::testbed {

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kIdle: return "idle";
    case RunStatus::kApplying: return "applying";
    case RunStatus::kOptimizing: return "optimizing";
    case RunStatus::kSweeping: return "sweeping";
  }
  return "unknown";
}

void SweepTable::write_csv(std::ostream& out) const {
  out << "freq_hz,config_db,baseline_db,delta_db\n";
  char line[128];
  for (const auto& p : points) {
    std::snprintf(line, sizeof line, "%.1f,%.6f,%.6f,%.6f\n", p.freq_hz, p.config_db, p.base_db, p.delta_db());
    out << line;
  }
}

nlohmann::json SweepTable::to_json() const {
  auto rows = nlohmann::json::array();
  for (const auto& p : points) {
    rows.push_back({{"freq_hz", p.freq_hz}, {"config_db", p.config_db}, {"baseline_db", p.base_db}, {"delta_db", p.delta_db()}});
  }
  return {{"points", rows}};
}

void write_pattern_csv(std::ostream& out, std::span<const PatternPoint> pattern) {
  out << "theta_deg,power_db\n";
  char line[96];
  for (const auto& p : pattern) {
    std::snprintf(line, sizeof line, "%.4f,%.6f\n", p.theta_deg, p.power_db);
    out << line;
  }
}

nlohmann::json ApplyResult::to_json() const {
  return {{"report", report.to_json()},
          {"config_hex", config.to_hex()},
          {"power_db", power_db ? nlohmann::json(*power_db) : nlohmann::json(nullptr)}};
}

// ---------------------------------------------------------------------------

void TraceStream::start() {
  std::lock_guard lock(mutex_);
  entries_.clear();
  finished_ = false;
  error_.reset();
}

void TraceStream::push(const TraceEntry& entry) {
  {
    std::lock_guard lock(mutex_);
    entries_.push_back(entry);
  }
  cv_.notify_all();
}

void TraceStream::finish(std::optional<std::string> error) {
  {
    std::lock_guard lock(mutex_);
    finished_ = true;
    error_ = std::move(error);
  }
  cv_.notify_all();
}

TraceStream::Chunk TraceStream::read_from(std::size_t from, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout, [&] { return finished_ || entries_.size() > from; });
  Chunk chunk;
  if (from < entries_.size()) chunk.entries.assign(entries_.begin() + static_cast<std::ptrdiff_t>(from), entries_.end());
  chunk.next = std::max(from, entries_.size());
  chunk.finished = finished_ && chunk.next >= entries_.size();
  chunk.error = error_;
  return chunk;
}

PowerTrace TraceStream::trace() const {
  std::lock_guard lock(mutex_);
  return {entries_};
}

// ---------------------------------------------------------------------------

Testbed::Lease::~Lease() {
  if (owner_ != nullptr) {
    owner_->status_.store(RunStatus::kIdle);
    owner_->publish();
  }
}

Testbed::Testbed(Scenario scenario) { rebuild(std::move(scenario)); }

Testbed::Lease Testbed::acquire(RunStatus purpose) {
  RunStatus expected = RunStatus::kIdle;
  if (!status_.compare_exchange_strong(expected, purpose)) {
    throw Error(ErrorCode::kBusy, "testbed is busy", {{"status", std::string(to_string(expected))}});
  }
  Lease lease(this);
  publish();
  return lease;
}

void Testbed::rebuild(Scenario scenario) {
  scenario.validate();
  auto next = std::make_shared<const Scenario>(std::move(scenario));
  auto chain = std::make_unique<control::BlockChain>(control::BlockChain::for_geometry(next->geometry));
  auto channel = std::make_unique<CascadeChannel>(next->geometry, next->model, next->placement, next->f_probe_hz, next->engine);
  const double reference = next->reference_gain.value_or(std::abs(channel->gain(PhaseConfig::all_off(next->geometry))));
  if (!(reference > 0.0)) {
    throw Error(ErrorCode::kScenarioViolation, "all-OFF baseline gain is zero; set reference_gain explicitly");
  }

  scenario_ = std::move(next);
  chain_ = std::move(chain);
  channel_ = std::move(channel);
  reference_gain_ = reference;
  noise_rng_.seed(scenario_->seed);
  final_config_.reset();

  const PhaseConfig baseline = PhaseConfig::all_off(scenario_->geometry);
  const auto report = chain_->apply(baseline);
  applied_ = baseline;
  power_db_ = report.ok() ? std::optional<double>(measure_locked()) : std::nullopt;
  publish();
}

double Testbed::measure_locked() {
  const PhaseConfig on_boards = chain_->assembled_config();
  double p = received_power_db(channel_->gain(on_boards), reference_gain_, scenario_->offset_db);
  if (scenario_->noise_sigma_db > 0.0) p += std::normal_distribution<double>(0.0, scenario_->noise_sigma_db)(noise_rng_);
  return p;
}

double Testbed::measure() {
  Lease lease = acquire(RunStatus::kApplying);
  power_db_ = measure_locked();
  return *power_db_;
}

void Testbed::publish() {
  auto snap = std::make_shared<Snapshot>();
  snap->scenario = scenario_;
  snap->config = applied_;
  snap->power_db = power_db_;
  snap->blocks = chain_->blocks();
  snap->final_config = final_config_;
  snap->status = status_.load();
  std::lock_guard lock(snapshot_mutex_);
  snap->version = ++version_;
  snapshot_ = std::move(snap);
}

std::shared_ptr<const Snapshot> Testbed::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

ApplyResult Testbed::apply(const PhaseConfig& config) {
  Lease lease = acquire(RunStatus::kApplying);
  return apply(lease, config);
}

ApplyResult Testbed::apply(Lease&, const PhaseConfig& config) {
  config.require_matches(scenario_->geometry);
  ApplyResult result{chain_->apply(config), config, std::nullopt};
  try {
    applied_ = chain_->assembled_config();
    power_db_ = measure_locked();
  } catch (const Error&) {
    applied_ = config;
    power_db_.reset();
  }
  result.config = applied_;
  result.power_db = power_db_;
  publish();
  return result;
}

PhaseConfig Testbed::codebook(const Direction& target) const {
  const auto scenario = snapshot()->scenario;
  const PhaseMatrix ideal = ideal_element_phase_deg(scenario->geometry, scenario->placement.tx_pos, target,
                                                    scenario->f_probe_hz, scenario->engine);
  return quantize_codebook(ideal, scenario->model, scenario->f_probe_hz);
}

ApplyResult Testbed::steer(const Direction& target) {
  Lease lease = acquire(RunStatus::kApplying);
  return apply(lease, codebook(target));
}

PowerTrace Testbed::run_optimization(const OptimizerSettings& settings) {
  Lease lease = acquire(RunStatus::kOptimizing);
  return run_optimization(lease, settings);
}

PowerTrace Testbed::run_optimization(Lease&, const OptimizerSettings& settings) {
  trace_.start();
  publish();
  try {
    auto measure_fn = [this](const PhaseConfig& config) {
      const auto report = chain_->apply(config);
      if (!report.ok()) {
        auto failed = nlohmann::json::array();
        for (const auto& a : report.failed_addresses()) failed.push_back(a.value());
        throw Error(ErrorCode::kMeasurementFailed, "control plane failed to configure every block",
                    {{"failed_addresses", failed}});
      }
      return measure_locked();
    };
    auto result = greedy_optimize(measure_fn, PhaseConfig::all_off(scenario_->geometry), settings,
                                  [this](const TraceEntry& e) { trace_.push(e); });
    chain_->apply(result.config);
    applied_ = chain_->assembled_config();
    power_db_ = measure_locked();
    final_config_ = result.config;
    publish();
    trace_.finish();
    return result.trace;
  } catch (const std::exception& e) {
    try {
      applied_ = chain_->assembled_config();
      power_db_ = measure_locked();
    } catch (const Error&) {
      power_db_.reset();
    }
    publish();
    trace_.finish(std::string(e.what()));
    throw;
  }
}

SweepTable Testbed::run_sweep(const PhaseConfig& config_a, const PhaseConfig& config_b) {
  Lease lease = acquire(RunStatus::kSweeping);
  const Scenario& s = *scenario_;
  SweepTable table{frequency_sweep(s.geometry, config_a, config_b, s.model, s.placement, s.f_grid_hz,
                                   {reference_gain_, s.offset_db}, s.engine)};
  if (artifact_dir_) {
    std::ofstream out(*artifact_dir_ / "sweep.csv");
    if (!out) throw Error(ErrorCode::kIo, "cannot write sweep artifact", {{"dir", artifact_dir_->string()}});
    table.write_csv(out);
  }
  return table;
}

std::vector<PatternPoint> Testbed::pattern(double theta_min_deg, double theta_max_deg, std::size_t n,
                                           double phi_deg) const {
  if (n == 0 || !(theta_min_deg <= theta_max_deg)) {
    throw Error(ErrorCode::kInvalidArgument, "pattern grid needs n >= 1 and theta_min <= theta_max");
  }
  const auto snap = snapshot();
  const Scenario& s = *snap->scenario;
  const auto grid = linspace(theta_min_deg, theta_max_deg, n);
  return radiation_pattern(s.geometry, snap->config, s.model, s.placement.tx_pos, s.f_probe_hz, grid, phi_deg, s.engine);
}

void Testbed::replace_scenario(Scenario scenario) {
  Lease lease = acquire(RunStatus::kApplying);
  rebuild(std::move(scenario));
}

}  // namespace ris::testbed
