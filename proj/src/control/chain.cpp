#include "ris/control/chain.hpp"

#include <algorithm>

#include "ris/control/partition.hpp"
#include "ris/error.hpp"

namespace ris::control {

nlohmann::json BusRecord::to_json() const {
  nlohmann::json j = {{"t", tick},
                      {"link", link},
                      {"dir", direction == BusDirection::kDown ? "down" : "up"},
                      {"hex", bytes_to_hex(bytes)}};
  if (dropped) j["dropped"] = true;
  return j;
}

nlohmann::json BlockCensus::to_json() const {
  nlohmann::json j = {{"index", index},
                      {"mode", std::string(to_string(mode))},
                      {"powered", powered},
                      {"configured", configured},
                      {"frames_seen", frames_seen}};
  j["address"] = address ? nlohmann::json(address->value()) : nlohmann::json(nullptr);
  j["last_status"] = last_error ? std::string(to_string(*last_error)) : std::string("OK");
  return j;
}

BlockChain::BlockChain(ArrayGeometry geometry, std::vector<BlockSpec> blocks, MasterSettings settings)
    : geometry_(geometry) {
  require_partitionable(geometry_);
  if (blocks.empty() || blocks.front().mode != BlockMode::kMaster) {
    throw Error(ErrorCode::kInvalidArgument, "chain must start with its master block");
  }
  const auto masters = std::count_if(blocks.begin(), blocks.end(), [](const BlockSpec& b) { return b.mode == BlockMode::kMaster; });
  if (masters != 1) {
    throw Error(ErrorCode::kInvalidArgument, "chain must have exactly one master", {{"masters", masters}});
  }
  if (blocks.size() - 1 > kMaxBlocks) {
    throw Error(ErrorCode::kInvalidArgument, "chain supports at most 16 slaves", {{"slaves", blocks.size() - 1}});
  }
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    if (!blocks[i].address || blocks[i].address->is_broadcast()) {
      throw Error(ErrorCode::kInvalidArgument, "slave needs a unicast address", {{"index", i}});
    }
  }
  if (blocks.front().address && blocks.front().address->is_broadcast()) {
    throw Error(ErrorCode::kInvalidArgument, "master address cannot be broadcast");
  }

  master_.block.mode = BlockMode::kMaster;
  master_.block.address = blocks.front().address;
  master_.geometry = geometry_;
  master_.settings = settings;
  // Round trip to the far end is 2 * slaves ticks; leave headroom.
  master_.settings.reply_timeout_ticks = std::max<std::uint64_t>(settings.reply_timeout_ticks, 2 * blocks.size() + 8);
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    BlockState s;
    s.mode = BlockMode::kSlave;
    s.address = blocks[i].address;
    slaves_.push_back(s);
  }
  link_powered_.assign(slaves_.size(), true);
  refresh_power();
}

BlockChain BlockChain::for_geometry(const ArrayGeometry& geometry) {
  require_partitionable(geometry);
  std::vector<BlockSpec> specs{{BlockMode::kMaster, BlockAddress(0)}};
  for (unsigned a = 1; a < geometry.block_count(); ++a) specs.push_back({BlockMode::kSlave, BlockAddress(a)});
  return BlockChain(geometry, std::move(specs));
}

const BlockState& BlockChain::block(std::size_t index) const {
  if (index == 0) return master_.block;
  if (index > slaves_.size()) throw Error(ErrorCode::kOutOfRange, "block index out of range", {{"index", index}});
  return slaves_[index - 1];
}

std::vector<BlockCensus> BlockChain::blocks() const {
  std::vector<BlockCensus> out;
  for (std::size_t i = 0; i < size(); ++i) {
    const BlockState& b = block(i);
    out.push_back({i, b.mode, b.address, b.powered, b.configured, b.frames_seen, b.last_error});
  }
  return out;
}

void BlockChain::set_link_powered(std::size_t link, bool powered) {
  if (link >= link_powered_.size()) throw Error(ErrorCode::kOutOfRange, "link index out of range", {{"link", link}});
  link_powered_[link] = powered;
  refresh_power();
}

void BlockChain::refresh_power() {
  bool upstream = master_.block.powered;
  for (std::size_t i = 0; i < slaves_.size(); ++i) {
    upstream = upstream && link_powered_[i];
    slaves_[i].powered = upstream;
  }
}

void BlockChain::emit(std::size_t from_block, std::vector<OutboundFrame> frames) {
  for (auto& f : frames) {
    Event ev;
    ev.time = now_ + 1;
    ev.seq = seq_++;
    ev.bytes = std::move(f.bytes);
    if (f.toward == LinkSide::kDownstream) {
      if (from_block + 1 >= size()) continue;  // end of chain
      ev.link = from_block;
      ev.direction = BusDirection::kDown;
    } else {
      if (from_block == 0) continue;
      ev.link = from_block - 1;
      ev.direction = BusDirection::kUp;
    }
    queue_.push(std::move(ev));
  }
}

void BlockChain::schedule_timer() {
  const auto next = master_.next_deadline();
  if (!master_.busy || !next) return;
  const std::uint64_t at = std::max(*next, now_);
  if (timer_at_ && *timer_at_ == at) return;
  timer_at_ = at;
  Event ev;
  ev.time = at;
  ev.kind = 1;
  ev.seq = seq_++;
  queue_.push(std::move(ev));
}

void BlockChain::deliver(Event ev) {
  BusDelivery d{ev.time, ev.link, ev.direction, std::move(ev.bytes), false};
  if (injector_) injector_(d);
  if (logging_) log_.push_back({d.tick, d.link, d.direction, d.bytes, d.drop});
  if (d.drop) return;

  const std::size_t target = d.direction == BusDirection::kDown ? d.link + 1 : d.link;
  const LinkSide from = d.direction == BusDirection::kDown ? LinkSide::kUpstream : LinkSide::kDownstream;
  if (target == 0) {
    auto step = master_step(std::move(master_), InboundFrame{from, std::move(d.bytes)}, now_);
    master_ = std::move(step.state);
    emit(0, std::move(step.out));
  } else {
    auto step = slave_step(std::move(slaves_[target - 1]), InboundFrame{from, std::move(d.bytes)});
    slaves_[target - 1] = std::move(step.state);
    emit(target, std::move(step.out));
  }
}

MasterReport BlockChain::execute(const NorthboundCommand& command) {
  auto step = master_step(std::move(master_), command, now_);
  master_ = std::move(step.state);
  emit(0, std::move(step.out));
  timer_at_.reset();
  schedule_timer();

  while (master_.busy && !queue_.empty()) {
    Event ev = queue_.top();
    queue_.pop();
    now_ = std::max(now_, ev.time);
    if (ev.kind == 1) {
      if (!timer_at_ || *timer_at_ != ev.time) continue;  // superseded
      timer_at_.reset();
      auto tick = master_step(std::move(master_), TimerTick{}, now_);
      master_ = std::move(tick.state);
      emit(0, std::move(tick.out));
    } else {
      deliver(std::move(ev));
    }
    schedule_timer();
  }
  // Stragglers (e.g. replies to superseded retransmissions) drain so the next
  // command starts on an idle bus.
  while (!queue_.empty()) {
    Event ev = queue_.top();
    queue_.pop();
    now_ = std::max(now_, ev.time);
    if (ev.kind == 0) deliver(std::move(ev));
  }
  timer_at_.reset();
  if (master_.busy) throw Error(ErrorCode::kMeasurementFailed, "control-plane command did not complete");
  return master_.report;
}

void BlockChain::write_bus_log(std::ostream& out) const {
  for (const auto& r : log_) out << r.to_json().dump() << '\n';
}

PhaseConfig BlockChain::assembled_config() const {
  std::map<BlockAddress, BlockPayload> payloads;
  for (std::size_t i = 0; i < geometry_.tile_rows; ++i) {
    for (std::size_t j = 0; j < geometry_.tile_cols; ++j) {
      const BlockAddress addr = tile_address(geometry_, i, j);
      const BlockState* owner = nullptr;
      std::size_t owner_index = 0;
      for (std::size_t b = 0; b < size(); ++b) {
        if (block(b).address && *block(b).address == addr) {
          owner = &block(b);
          owner_index = b;
          break;
        }
      }
      const nlohmann::json ctx = {{"address", addr.value()}, {"index", owner ? nlohmann::json(owner_index) : nlohmann::json(nullptr)}};
      if (!owner) throw Error(ErrorCode::kMeasurementFailed, "no block holds address " + std::to_string(addr.value()), ctx);
      if (!owner->powered) {
        throw Error(ErrorCode::kMeasurementFailed, "block " + std::to_string(addr.value()) + " is unpowered", ctx);
      }
      if (!owner->configured) {
        throw Error(ErrorCode::kMeasurementFailed, "block " + std::to_string(addr.value()) + " is unconfigured", ctx);
      }
      payloads.emplace(addr, owner->surface_bits);
    }
  }
  return reassemble_config(payloads, geometry_);
}

}  // namespace ris::control
