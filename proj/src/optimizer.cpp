#include "ris/optimizer.hpp"

#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "ris/error.hpp"

namespace ris {

namespace {

double probe(const MeasureFn& measure, const PhaseConfig& config, std::size_t index) {
  try {
    return measure(config);
  } catch (const Error& e) {
    auto ctx = e.context();
    ctx["probe_index"] = index;
    ctx["cause_code"] = std::string(to_string(e.code()));
    throw Error(ErrorCode::kProbeFailed, "measurement failed at probe " + std::to_string(index) + ": " + e.what(), ctx);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kProbeFailed, "measurement failed at probe " + std::to_string(index) + ": " + e.what(),
                {{"probe_index", index}});
  }
}

// Fisher-Yates on raw mt19937_64 output. std::shuffle and
// uniform_int_distribution are implementation-defined, this is not.
void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

std::string_view to_string(ElementOrder order) { return order == ElementOrder::kRandom ? "random" : "row-major"; }

ElementOrder element_order_from_string(std::string_view name) {
  if (name == "row-major") return ElementOrder::kRowMajor;
  if (name == "random") return ElementOrder::kRandom;
  throw Error(ErrorCode::kInvalidArgument, "unknown element order", {{"order", std::string(name)}});
}

nlohmann::json TraceEntry::to_json() const {
  nlohmann::json j = {{"iteration", iteration}, {"power_db", power_db}, {"accepted", accepted}};
  j["element"] = element ? nlohmann::json(*element) : nlohmann::json(nullptr);
  return j;
}

void PowerTrace::write_csv(std::ostream& out) const {
  out << "iteration,power_db,accepted\n";
  char line[96];
  for (const auto& e : entries) {
    std::snprintf(line, sizeof line, "%zu,%.6f,%d\n", e.iteration, e.power_db, e.accepted ? 1 : 0);
    out << line;
  }
}

nlohmann::json PowerTrace::to_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& e : entries) arr.push_back(e.to_json());
  return arr;
}

GreedyResult greedy_optimize(const MeasureFn& measure, PhaseConfig init, const OptimizerSettings& settings,
                             const ProbeObserver& observer) {
  if (settings.epsilon_db < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon_db must be >= 0", {{"epsilon_db", settings.epsilon_db}});
  }
  GreedyResult result;
  result.config = std::move(init);
  auto record = [&](TraceEntry entry) {
    result.trace.entries.push_back(entry);
    if (observer) observer(entry);
  };

  std::size_t probes = 0;
  double best = probe(measure, result.config, probes);
  record({probes++, best, true, std::nullopt});

  std::vector<std::size_t> order(result.config.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(settings.seed);

  for (std::size_t pass = 0; pass < settings.passes; ++pass) {
    if (settings.order == ElementOrder::kRandom) shuffle_indices(order, rng);
    std::size_t accepted = 0;
    for (std::size_t element : order) {
      result.config.flip(element);
      const double power = probe(measure, result.config, probes);
      const bool keep = power > best + settings.epsilon_db;
      if (keep) {
        best = power;
        ++accepted;
      } else {
        result.config.flip(element);
      }
      record({probes++, power, keep, element});
    }
    result.passes_run = pass + 1;
    if (accepted == 0) {
      result.converged = true;
      break;
    }
  }
  return result;
}

BruteForceResult brute_force_best(const MeasureFn& measure, const ArrayGeometry& geom) {
  geom.validate();
  const std::size_t n = geom.size();
  if (n > kBruteForceMaxElements) {
    throw Error(ErrorCode::kBudgetExceeded, "brute force is limited to 20 elements",
                {{"elements", n}, {"limit", kBruteForceMaxElements}});
  }
  // Counting up with element 0 as the most significant bit walks the bit
  // strings in lexicographic order; strict '>' keeps the first maximizer.
  BruteForceResult best{PhaseConfig::all_off(geom), -std::numeric_limits<double>::infinity()};
  PhaseConfig cfg = PhaseConfig::all_off(geom);
  bool first = true;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t code = 0; code < total; ++code) {
    for (std::size_t i = 0; i < n; ++i) cfg.set(i, ((code >> (n - 1 - i)) & 1U) != 0);
    const double p = probe(measure, cfg, static_cast<std::size_t>(code));
    if (first || p > best.power_db) {
      best = {cfg, p};
      first = false;
    }
  }
  return best;
}

double improvement_db(const PowerTrace& trace) {
  if (trace.entries.empty()) throw Error(ErrorCode::kInvalidArgument, "trace is empty");
  double last_accepted = trace.entries.front().power_db;
  for (const auto& e : trace.entries) {
    if (e.accepted) last_accepted = e.power_db;
  }
  return last_accepted - trace.entries.front().power_db;
}

}  // namespace ris
