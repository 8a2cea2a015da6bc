#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <utility>

#include "ris/array_engine.hpp"
#include "ris/control/chain.hpp"
#include "ris/optimizer.hpp"
#include "ris/testbed/scenario.hpp"

namespace ris::testbed {

enum class RunStatus { kIdle, kApplying, kOptimizing, kSweeping };
std::string_view to_string(RunStatus status);

struct SweepTable {
  std::vector<SweepPoint> points;

  /// Header `freq_hz,config_db,baseline_db,delta_db`.
  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

void write_pattern_csv(std::ostream& out, std::span<const PatternPoint> pattern);

struct ApplyResult {
  control::MasterReport report;
  PhaseConfig config;
  std::optional<double> power_db;  // empty when a block could not be read back

  nlohmann::json to_json() const;
};

/// Immutable view of the testbed published after every mutation.
struct Snapshot {
  std::shared_ptr<const Scenario> scenario;
  PhaseConfig config;
  std::optional<double> power_db;
  std::vector<control::BlockCensus> blocks;
  std::optional<PhaseConfig> final_config;  // from the last optimization run
  RunStatus status = RunStatus::kIdle;
  std::uint64_t version = 0;
};

/// Live feed of the current (or last) optimization run. Writers never wait on
/// readers.
class TraceStream {
 public:
  struct Chunk {
    std::vector<TraceEntry> entries;
    std::size_t next = 0;
    bool finished = false;
    std::optional<std::string> error;
  };

  void start();
  void push(const TraceEntry& entry);
  void finish(std::optional<std::string> error = std::nullopt);

  /// Entries from index `from` on; waits up to `timeout` when none are ready
  /// and the run is still going.
  Chunk read_from(std::size_t from, std::chrono::milliseconds timeout) const;
  PowerTrace trace() const;

 private:
  mutable std::mutex mutex_;
  mutable std::condition_variable cv_;
  std::vector<TraceEntry> entries_;
  bool finished_ = true;
  std::optional<std::string> error_;
};

/// Closed-loop virtual experiment: configurations travel through the emulated
/// block chain, and power is read from whatever the surface boards hold.
///
/// One mutating operation runs at a time (others get ErrorCode::kBusy);
/// readers use snapshot() and never block a run.
class Testbed {
 public:
  explicit Testbed(Scenario scenario);

  /// Exclusive right to mutate the testbed. Thread-agnostic, so a run may be
  /// claimed on one thread and executed on another.
  class Lease {
   public:
    Lease(Lease&& other) noexcept : owner_(std::exchange(other.owner_, nullptr)) {}
    Lease& operator=(Lease&&) = delete;
    ~Lease();

   private:
    friend class Testbed;
    explicit Lease(Testbed* owner) : owner_(owner) {}
    Testbed* owner_;
  };

  Lease acquire(RunStatus purpose);

  double measure();
  ApplyResult apply(const PhaseConfig& config);
  ApplyResult apply(Lease& lease, const PhaseConfig& config);
  ApplyResult steer(const Direction& target);
  PhaseConfig codebook(const Direction& target) const;

  PowerTrace run_optimization(const OptimizerSettings& settings);
  PowerTrace run_optimization(Lease& lease, const OptimizerSettings& settings);

  SweepTable run_sweep(const PhaseConfig& config_a, const PhaseConfig& config_b);

  std::vector<PatternPoint> pattern(double theta_min_deg, double theta_max_deg, std::size_t n,
                                    double phi_deg) const;

  void replace_scenario(Scenario scenario);

  /// Sweep CSVs are written here when set.
  void set_artifact_dir(std::optional<std::filesystem::path> dir) { artifact_dir_ = std::move(dir); }

  std::shared_ptr<const Snapshot> snapshot() const;
  RunStatus status() const { return status_.load(); }
  const TraceStream& trace_stream() const { return trace_; }
  double reference_gain() const { return reference_gain_; }
  const control::BlockChain& chain() const { return *chain_; }
  control::BlockChain& chain_for_testing() { return *chain_; }

 private:
  void rebuild(Scenario scenario);
  double measure_locked();
  void publish();

  std::atomic<RunStatus> status_{RunStatus::kIdle};
  std::shared_ptr<const Scenario> scenario_;
  std::unique_ptr<control::BlockChain> chain_;
  std::unique_ptr<CascadeChannel> channel_;
  double reference_gain_ = 1.0;
  std::mt19937_64 noise_rng_;
  PhaseConfig applied_;
  std::optional<double> power_db_;
  std::optional<PhaseConfig> final_config_;
  std::optional<std::filesystem::path> artifact_dir_;
  std::uint64_t version_ = 0;

  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
  TraceStream trace_;
};

}  // namespace ris::testbed
