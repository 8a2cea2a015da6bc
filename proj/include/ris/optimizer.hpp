#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ris/geometry.hpp"

namespace ris {

enum class ElementOrder { kRowMajor, kRandom };

std::string_view to_string(ElementOrder order);
ElementOrder element_order_from_string(std::string_view name);

struct OptimizerSettings {
  std::size_t passes = 1;  // 0 probes the baseline only
  double epsilon_db = 0.0;
  ElementOrder order = ElementOrder::kRowMajor;
  std::uint64_t seed = 0;  // used by ElementOrder::kRandom
};

/// One measurement. Entry 0 is the baseline probe; later entries are single
/// flips of `element`, kept iff `accepted`.
struct TraceEntry {
  std::size_t iteration = 0;
  double power_db = 0.0;
  bool accepted = false;
  std::optional<std::size_t> element;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
  nlohmann::json to_json() const;
};

struct PowerTrace {
  std::vector<TraceEntry> entries;

  friend bool operator==(const PowerTrace&, const PowerTrace&) = default;

  /// Header `iteration,power_db,accepted`, one row per probe.
  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

using MeasureFn = std::function<double(const PhaseConfig&)>;
using ProbeObserver = std::function<void(const TraceEntry&)>;

struct GreedyResult {
  PhaseConfig config;
  PowerTrace trace;
  std::size_t passes_run = 0;
  // True when the last pass accepted no flip, i.e. the config is
  // 1-flip-local-optimal up to epsilon_db.
  bool converged = false;
};

/// Single-flip greedy search. Visits elements in settings order, flips one
/// bit per probe and keeps it iff the measured power beats the best so far by
/// more than epsilon_db. Stops after `passes` passes or after a pass with no
/// accepted flip. `measure` is never called concurrently.
GreedyResult greedy_optimize(const MeasureFn& measure, PhaseConfig init, const OptimizerSettings& settings,
                             const ProbeObserver& observer = {});

struct BruteForceResult {
  PhaseConfig config;
  double power_db = 0.0;
};

inline constexpr std::size_t kBruteForceMaxElements = 20;

/// Exhaustive search over all 2^N configs (N <= 20). Ties go to the
/// lexicographically smallest row-major bit string.
BruteForceResult brute_force_best(const MeasureFn& measure, const ArrayGeometry& geom);

/// Last accepted power minus the first entry's power.
double improvement_db(const PowerTrace& trace);

}  // namespace ris
