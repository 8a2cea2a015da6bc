#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ris/control/frame.hpp"
#include "ris/geometry.hpp"

namespace ris::control {

struct BlockState {
  BlockMode mode = BlockMode::kSlave;
  std::optional<BlockAddress> address;
  BlockPayload surface_bits{};
  bool configured = false;
  bool powered = true;
  std::uint64_t frames_seen = 0;
  std::optional<StatusCode> last_error;
};

// Which neighbour a frame came from or goes to. Upstream is toward the master.
enum class LinkSide { kUpstream, kDownstream };

struct OutboundFrame {
  LinkSide toward = LinkSide::kDownstream;
  std::vector<std::uint8_t> bytes;
};

enum class CommandKind { kApply, kStatus, kPing, kReset };
std::string_view to_string(CommandKind kind);

struct NorthboundCommand {
  CommandKind kind = CommandKind::kPing;
  std::optional<PhaseConfig> config;  // kApply only

  /// {"cmd": "apply"|"status"|"ping"|"reset", "config_hex": "..."}
  nlohmann::json to_json() const;
  static NorthboundCommand from_json(const nlohmann::json& j, const ArrayGeometry& geom);
};

struct InboundFrame {
  LinkSide from = LinkSide::kUpstream;
  std::vector<std::uint8_t> bytes;
};

struct TimerTick {};

using BlockEvent = std::variant<NorthboundCommand, InboundFrame, TimerTick>;

enum class DeliveryState { kPending, kOk, kRejected, kFailed };
std::string_view to_string(DeliveryState state);

struct AddressOutcome {
  DeliveryState state = DeliveryState::kPending;
  unsigned attempts = 0;
  bool local = false;  // handled by the master's own surface board
  std::optional<StatusReply> reply;
  std::optional<StatusCode> error;
};

struct CensusEntry {
  BlockAddress address;
  BlockMode mode = BlockMode::kSlave;
  unsigned replies = 0;
};

struct MasterReport {
  CommandKind kind = CommandKind::kPing;
  std::map<BlockAddress, AddressOutcome> outcomes;
  std::vector<CensusEntry> census;  // kPing only, ascending address
  std::optional<StatusCode> error;

  std::size_t succeeded() const;
  std::size_t total() const { return outcomes.size(); }
  bool ok() const { return !error && succeeded() == total(); }
  std::vector<BlockAddress> failed_addresses() const;
  nlohmann::json to_json() const;
};

struct MasterSettings {
  std::uint64_t reply_timeout_ticks = 64;
  unsigned max_retransmissions = 3;
};

struct PendingDelivery {
  std::vector<std::uint8_t> bytes;
  std::uint64_t deadline = 0;
  unsigned retransmissions = 0;
};

struct MasterState {
  BlockState block = [] {
    BlockState b;
    b.mode = BlockMode::kMaster;
    return b;
  }();
  ArrayGeometry geometry;
  MasterSettings settings;
  std::uint64_t now = 0;
  bool busy = false;
  MasterReport report;  // in progress while busy, else the last completed one
  std::map<BlockAddress, PendingDelivery> pending;
  std::optional<std::uint64_t> census_deadline;

  std::optional<std::uint64_t> next_deadline() const;
};

struct MasterStep {
  MasterState state;
  std::vector<OutboundFrame> out;
};

struct SlaveStep {
  BlockState state;
  std::vector<OutboundFrame> out;
};

/// Master controller. North-bound commands fan out down-chain as one frame per
/// block address (the tile owned by the master itself is applied locally);
/// replies are matched by source address; a missing reply is retransmitted
/// max_retransmissions times before the address is marked failed. `now` is
/// the bus clock at which the event happens.
MasterStep master_step(MasterState state, const BlockEvent& event, std::uint64_t now);

/// Slave controller. Consumes down-chain frames addressed to it, forwards the
/// rest unchanged (after local processing, store-and-forward), consumes and
/// forwards broadcasts, and relays all up-chain traffic toward the master
/// unchanged. Unpowered blocks drop everything.
SlaveStep slave_step(BlockState state, const BlockEvent& event);

}  // namespace ris::control
