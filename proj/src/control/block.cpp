#include "ris/control/block.hpp"

#include <algorithm>

#include "ris/control/partition.hpp"
#include "ris/error.hpp"

namespace ris::control {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

StatusReply own_status(const BlockState& b) {
  return {b.address.value_or(BlockAddress()), b.last_error.value_or(StatusCode::kOk), b.powered, b.surface_bits};
}

// Acknowledges a command that just succeeded; stale link errors stay visible
// through GET_STATUS only.
StatusReply ack(const BlockState& b) {
  StatusReply r = own_status(b);
  r.status = StatusCode::kOk;
  return r;
}

void finish_if_done(MasterState& s) {
  if (s.busy && s.pending.empty() && !s.census_deadline) s.busy = false;
}

void finalize_census(MasterState& s) {
  s.census_deadline.reset();
  std::sort(s.report.census.begin(), s.report.census.end(),
            [](const CensusEntry& a, const CensusEntry& b) { return a.address < b.address; });
  for (const auto& e : s.report.census) {
    const bool clashes_with_master = s.block.address && *s.block.address == e.address;
    if (e.replies > 1 || clashes_with_master) s.report.error = StatusCode::kAddressConflict;
  }
}

void send(MasterState& s, std::vector<OutboundFrame>& out, BlockAddress dest, const Frame& frame) {
  auto bytes = encode_frame(frame);
  out.push_back({LinkSide::kDownstream, bytes});
  s.pending[dest] = {std::move(bytes), s.now + s.settings.reply_timeout_ticks, 0};
  s.report.outcomes[dest] = {DeliveryState::kPending, 1, false, std::nullopt, std::nullopt};
}

void start_command(MasterState& s, const NorthboundCommand& cmd, std::vector<OutboundFrame>& out) {
  if (s.busy) throw Error(ErrorCode::kBusy, "master has a command in flight");
  s.report = MasterReport{cmd.kind, {}, {}, std::nullopt};
  s.pending.clear();
  s.census_deadline.reset();
  s.busy = true;

  if (cmd.kind == CommandKind::kPing) {
    out.push_back({LinkSide::kDownstream, encode_frame(make_ping(BlockAddress::broadcast()))});
    s.census_deadline = s.now + s.settings.reply_timeout_ticks;
    return;
  }

  std::map<BlockAddress, BlockPayload> payloads;
  if (cmd.kind == CommandKind::kApply) {
    if (!cmd.config) throw Error(ErrorCode::kInvalidArgument, "apply command without a config");
    payloads = partition_config(*cmd.config, s.geometry);
  } else {
    require_partitionable(s.geometry);
    for (std::size_t i = 0; i < s.geometry.tile_rows; ++i) {
      for (std::size_t j = 0; j < s.geometry.tile_cols; ++j) payloads.emplace(tile_address(s.geometry, i, j), BlockPayload{});
    }
  }

  for (const auto& [addr, surface] : payloads) {
    if (s.block.address && *s.block.address == addr) {
      // The master's own surface board is loaded directly (the I2C hop).
      if (cmd.kind == CommandKind::kApply || cmd.kind == CommandKind::kReset) {
        s.block.surface_bits = surface;
        s.block.configured = true;
      }
      if (cmd.kind == CommandKind::kReset) s.block.last_error.reset();
      s.report.outcomes[addr] = {DeliveryState::kOk, 0, true, own_status(s.block), std::nullopt};
      continue;
    }
    switch (cmd.kind) {
      case CommandKind::kApply: send(s, out, addr, make_set_config(addr, surface)); break;
      case CommandKind::kStatus: send(s, out, addr, make_get_status(addr)); break;
      case CommandKind::kReset: send(s, out, addr, make_reset(addr)); break;
      case CommandKind::kPing: break;
    }
  }
  finish_if_done(s);
}

void handle_reply(MasterState& s, const InboundFrame& in) {
  ++s.block.frames_seen;
  const auto decoded = decode_frame(in.bytes);
  if (const auto* err = std::get_if<DecodeError>(&decoded)) {
    s.block.last_error = to_status(*err);
    return;
  }
  const Frame& frame = std::get<Frame>(decoded);
  if (const auto pong = parse_pong(frame)) {
    if (!s.census_deadline) return;
    auto it = std::find_if(s.report.census.begin(), s.report.census.end(),
                           [&](const CensusEntry& e) { return e.address == pong->source; });
    if (it == s.report.census.end()) {
      s.report.census.push_back({pong->source, pong->mode, 1});
    } else {
      ++it->replies;
    }
    return;
  }
  if (const auto reply = parse_status_reply(frame)) {
    const auto it = s.pending.find(reply->source);
    if (it == s.pending.end()) return;  // late duplicate after a retransmission
    AddressOutcome& outcome = s.report.outcomes[reply->source];
    outcome.reply = *reply;
    const bool accepted = s.report.kind == CommandKind::kStatus || reply->status == StatusCode::kOk;
    outcome.state = accepted ? DeliveryState::kOk : DeliveryState::kRejected;
    if (!accepted) outcome.error = reply->status;
    s.pending.erase(it);
  }
}

void handle_timer(MasterState& s, std::vector<OutboundFrame>& out) {
  for (auto it = s.pending.begin(); it != s.pending.end();) {
    PendingDelivery& p = it->second;
    if (p.deadline > s.now) {
      ++it;
      continue;
    }
    AddressOutcome& outcome = s.report.outcomes[it->first];
    if (p.retransmissions < s.settings.max_retransmissions) {
      ++p.retransmissions;
      ++outcome.attempts;
      p.deadline = s.now + s.settings.reply_timeout_ticks;
      out.push_back({LinkSide::kDownstream, p.bytes});
      ++it;
    } else {
      outcome.state = DeliveryState::kFailed;
      outcome.error = StatusCode::kTimeout;
      it = s.pending.erase(it);
    }
  }
  if (s.census_deadline && *s.census_deadline <= s.now) finalize_census(s);
}

}  // namespace

std::string_view to_string(CommandKind kind) {
  switch (kind) {
    case CommandKind::kApply: return "apply";
    case CommandKind::kStatus: return "status";
    case CommandKind::kPing: return "ping";
    case CommandKind::kReset: return "reset";
  }
  return "unknown";
}

nlohmann::json NorthboundCommand::to_json() const {
  nlohmann::json j = {{"cmd", std::string(to_string(kind))}};
  if (config) j["config_hex"] = config->to_hex();
  return j;
}

NorthboundCommand NorthboundCommand::from_json(const nlohmann::json& j, const ArrayGeometry& geom) {
  if (!j.is_object() || !j.contains("cmd")) throw Error(ErrorCode::kParse, "north-bound command needs a \"cmd\" field");
  const std::string name = j.at("cmd").get<std::string>();
  NorthboundCommand cmd;
  if (name == "apply") {
    cmd.kind = CommandKind::kApply;
    if (!j.contains("config_hex")) throw Error(ErrorCode::kParse, "apply needs config_hex");
    cmd.config = PhaseConfig::from_hex(j.at("config_hex").get<std::string>(), geom.rows(), geom.cols());
  } else if (name == "status") {
    cmd.kind = CommandKind::kStatus;
  } else if (name == "ping") {
    cmd.kind = CommandKind::kPing;
  } else if (name == "reset") {
    cmd.kind = CommandKind::kReset;
  } else {
    throw Error(ErrorCode::kParse, "unknown north-bound command", {{"cmd", name}});
  }
  return cmd;
}

std::string_view to_string(DeliveryState state) {
  switch (state) {
    case DeliveryState::kPending: return "pending";
    case DeliveryState::kOk: return "ok";
    case DeliveryState::kRejected: return "rejected";
    case DeliveryState::kFailed: return "failed";
  }
  return "unknown";
}

std::size_t MasterReport::succeeded() const {
  return static_cast<std::size_t>(std::count_if(outcomes.begin(), outcomes.end(), [](const auto& kv) {
    return kv.second.state == DeliveryState::kOk;
  }));
}

std::vector<BlockAddress> MasterReport::failed_addresses() const {
  std::vector<BlockAddress> out;
  for (const auto& [addr, o] : outcomes) {
    if (o.state != DeliveryState::kOk) out.push_back(addr);
  }
  return out;
}

nlohmann::json MasterReport::to_json() const {
  auto blocks = nlohmann::json::array();
  for (const auto& [addr, o] : outcomes) {
    nlohmann::json b = {{"address", addr.value()},
                        {"state", std::string(to_string(o.state))},
                        {"attempts", o.attempts},
                        {"local", o.local}};
    if (o.error) b["error"] = std::string(to_string(*o.error));
    if (o.reply) {
      b["powered"] = o.reply->powered;
      b["surface_hex"] = bytes_to_hex(o.reply->surface);
    }
    blocks.push_back(std::move(b));
  }
  nlohmann::json j = {{"command", std::string(to_string(kind))},
                      {"succeeded", succeeded()},
                      {"total", total()},
                      {"ok", ok()},
                      {"blocks", blocks}};
  if (kind == CommandKind::kPing) {
    auto census_json = nlohmann::json::array();
    for (const auto& e : census) {
      census_json.push_back({{"address", e.address.value()}, {"mode", std::string(to_string(e.mode))}, {"replies", e.replies}});
    }
    j["census"] = census_json;
  }
  j["error"] = error ? nlohmann::json(std::string(to_string(*error))) : nlohmann::json(nullptr);
  return j;
}

std::optional<std::uint64_t> MasterState::next_deadline() const {
  std::optional<std::uint64_t> next = census_deadline;
  for (const auto& [addr, p] : pending) {
    if (!next || p.deadline < *next) next = p.deadline;
  }
  return next;
}

MasterStep master_step(MasterState state, const BlockEvent& event, std::uint64_t now) {
  state.now = std::max(state.now, now);
  std::vector<OutboundFrame> out;
  std::visit(Overloaded{
                 [&](const NorthboundCommand& cmd) { start_command(state, cmd, out); },
                 [&](const InboundFrame& in) {
                   if (in.from == LinkSide::kDownstream) handle_reply(state, in);
                 },
                 [&](const TimerTick&) { handle_timer(state, out); },
             },
             event);
  finish_if_done(state);
  return {std::move(state), std::move(out)};
}

SlaveStep slave_step(BlockState state, const BlockEvent& event) {
  std::vector<OutboundFrame> out;
  std::visit(Overloaded{
                 [&](const NorthboundCommand&) { state.last_error = StatusCode::kModeViolation; },
                 [&](const TimerTick&) {},
                 [&](const InboundFrame& in) {
                   if (!state.powered) return;
                   ++state.frames_seen;
                   if (in.from == LinkSide::kDownstream) {
                     out.push_back({LinkSide::kUpstream, in.bytes});
                     return;
                   }
                   const auto decoded = decode_frame(in.bytes);
                   if (const auto* err = std::get_if<DecodeError>(&decoded)) {
                     state.last_error = to_status(*err);
                     return;
                   }
                   const Frame& frame = std::get<Frame>(decoded);
                   const bool mine = state.address && frame.dest == *state.address;
                   const bool broadcast = frame.dest.is_broadcast();
                   if (mine || broadcast) {
                     switch (frame.opcode) {
                       case Opcode::kSetConfig:
                         state.surface_bits = set_config_surface(frame);
                         state.configured = true;
                         out.push_back({LinkSide::kUpstream, encode_frame(make_status_reply(ack(state)))});
                         break;
                       case Opcode::kGetStatus:
                         out.push_back({LinkSide::kUpstream, encode_frame(make_status_reply(own_status(state)))});
                         break;
                       case Opcode::kPing:
                         if (state.address) {
                           out.push_back({LinkSide::kUpstream, encode_frame(make_pong({*state.address, state.mode}))});
                         }
                         break;
                       case Opcode::kReset:
                         state.surface_bits = {};
                         state.configured = true;
                         state.last_error.reset();
                         out.push_back({LinkSide::kUpstream, encode_frame(make_status_reply(ack(state)))});
                         break;
                       case Opcode::kStatusReply:
                       case Opcode::kPong: break;
                     }
                   }
                   if (!mine) out.push_back({LinkSide::kDownstream, in.bytes});
                 },
             },
             event);
  return {std::move(state), std::move(out)};
}

}  // namespace ris::control
