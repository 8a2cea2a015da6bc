#pragma once

#include <functional>
#include <ostream>
#include <queue>

#include "ris/control/block.hpp"

namespace ris::control {

struct BlockSpec {
  BlockMode mode = BlockMode::kSlave;
  std::optional<BlockAddress> address;
};

enum class BusDirection { kDown, kUp };

/// A frame about to be delivered over one link. Fault injectors may rewrite
/// the bytes or set `drop`.
struct BusDelivery {
  std::uint64_t tick = 0;
  std::size_t link = 0;  // link i joins block i and block i + 1
  BusDirection direction = BusDirection::kDown;
  std::vector<std::uint8_t> bytes;
  bool drop = false;
};

using FaultInjector = std::function<void(BusDelivery&)>;

struct BusRecord {
  std::uint64_t tick = 0;
  std::size_t link = 0;
  BusDirection direction = BusDirection::kDown;
  std::vector<std::uint8_t> bytes;
  bool dropped = false;

  nlohmann::json to_json() const;
};

struct BlockCensus {
  std::size_t index = 0;
  BlockMode mode = BlockMode::kSlave;
  std::optional<BlockAddress> address;
  bool powered = true;
  bool configured = false;
  std::uint64_t frames_seen = 0;
  std::optional<StatusCode> last_error;

  nlohmann::json to_json() const;
};

/// Master at index 0 followed by up to 16 slaves on a daisy chain, driven by a
/// discrete-event bus. Every link has a one-tick latency and delivers in FIFO
/// order.
class BlockChain {
 public:
  BlockChain(ArrayGeometry geometry, std::vector<BlockSpec> blocks, MasterSettings settings = {});

  /// Master at address 0 plus one slave per remaining tile, in tile order.
  static BlockChain for_geometry(const ArrayGeometry& geometry);

  MasterReport execute(const NorthboundCommand& command);
  MasterReport apply(const PhaseConfig& config) { return execute({CommandKind::kApply, config}); }
  MasterReport census() { return execute({CommandKind::kPing, std::nullopt}); }
  MasterReport status() { return execute({CommandKind::kStatus, std::nullopt}); }
  MasterReport reset() { return execute({CommandKind::kReset, std::nullopt}); }

  std::size_t size() const { return 1 + slaves_.size(); }
  const BlockState& block(std::size_t index) const;
  const MasterState& master() const { return master_; }
  const ArrayGeometry& geometry() const { return geometry_; }
  std::uint64_t now() const { return now_; }
  std::vector<BlockCensus> blocks() const;

  /// Cuts or restores power on link `link` (feeding block link + 1); every
  /// block past a cut link is unpowered.
  void set_link_powered(std::size_t link, bool powered);
  void set_fault_injector(FaultInjector injector) { injector_ = std::move(injector); }

  void set_bus_logging(bool enabled) { logging_ = enabled; }
  const std::vector<BusRecord>& bus_log() const { return log_; }
  void clear_bus_log() { log_.clear(); }
  /// JSON lines: {"t", "link", "dir", "hex"[, "dropped"]}.
  void write_bus_log(std::ostream& out) const;

  /// Global config read back from the surface boards. Throws a
  /// measurement error naming the first unpowered or unconfigured block.
  PhaseConfig assembled_config() const;

 private:
  struct Event {
    std::uint64_t time = 0;
    int kind = 0;  // 0 delivery, 1 master timer; deliveries win ties
    std::uint64_t seq = 0;
    std::size_t link = 0;
    BusDirection direction = BusDirection::kDown;
    std::vector<std::uint8_t> bytes;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      if (a.kind != b.kind) return a.kind > b.kind;
      return a.seq > b.seq;
    }
  };

  void emit(std::size_t from_block, std::vector<OutboundFrame> frames);
  void schedule_timer();
  void deliver(Event ev);
  void refresh_power();

  ArrayGeometry geometry_;
  MasterState master_;
  std::vector<BlockState> slaves_;
  std::vector<bool> link_powered_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::optional<std::uint64_t> timer_at_;
  std::uint64_t now_ = 0;
  std::uint64_t seq_ = 0;
  FaultInjector injector_;
  bool logging_ = false;
  std::vector<BusRecord> log_;
};

}  // namespace ris::control
