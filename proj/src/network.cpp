#include "mwsn/network.hpp"

#include <string>

#include "mwsn/error.hpp"

namespace mwsn {

void validate(const RadioParams& r) {
  if (!(r.range > 0.0)) throw Error(ErrorCode::Config, "range must be > 0");
  if (!(r.tx_delay >= 0.0)) throw Error(ErrorCode::Config, "tx_delay must be >= 0");
}

Topology::Topology(std::vector<Vec2> positions)
    : positions_(std::move(positions)), enabled_(positions_.size(), 1) {}

Vec2 Topology::position(NodeId id) const {
  if (!contains(id)) throw Error(ErrorCode::InvalidArgument, "unknown node id " + std::to_string(id));
  return positions_[id];
}

void Topology::set_position(NodeId id, Vec2 p) {
  if (!contains(id)) throw Error(ErrorCode::InvalidArgument, "unknown node id " + std::to_string(id));
  positions_[id] = p;
}

bool Topology::enabled(NodeId id) const {
  if (!contains(id)) throw Error(ErrorCode::InvalidArgument, "unknown node id " + std::to_string(id));
  return enabled_[id] != 0;
}

void Topology::set_enabled(NodeId id, bool on) {
  if (!contains(id)) throw Error(ErrorCode::InvalidArgument, "unknown node id " + std::to_string(id));
  enabled_[id] = on ? 1 : 0;
}

std::vector<NodeId> neighbors(NodeId node, const Topology& topo, const RadioParams& r) {
  const Vec2 self = topo.position(node);
  std::vector<NodeId> out;
  for (NodeId i = 0; i < topo.size(); ++i) {
    if (i == node || !topo.enabled(i)) continue;
    if (in_range(self, topo.positions()[i], r)) out.push_back(i);
  }
  return out;
}

const char* to_string(MessageClass c) noexcept {
  switch (c) {
    case MessageClass::Data: return "data";
    case MessageClass::Hello: return "hello";
    case MessageClass::Announce: return "announce";
    case MessageClass::Relay: return "relay";
    case MessageClass::Gradient: return "gradient";
  }
  return "unknown";
}

bool Radio::link_up(NodeId a, NodeId b) const {
  return topo_.enabled(a) && topo_.enabled(b) && in_range(topo_.position(a), topo_.position(b), params_);
}

SendOutcome Radio::unicast(NodeId from, NodeId to, MessageClass cls, std::function<void()> on_receive,
                           std::function<void()> on_drop) {
  if (!topo_.contains(from) || !topo_.contains(to)) {
    throw Error(ErrorCode::InvalidArgument,
                "unicast between unknown nodes " + std::to_string(from) + " -> " + std::to_string(to));
  }
  if (tx_hook_) tx_hook_(from, cls);
  if (!link_up(from, to)) return SendOutcome::DroppedOutOfRange;
  kernel_.schedule_in(params_.tx_delay, EventKind::PacketDelivery, to,
                      [this, from, to, cls, rx = std::move(on_receive), drop = std::move(on_drop)] {
                        if (link_up(from, to)) {
                          if (rx_hook_) rx_hook_(to, cls);
                          if (rx) rx();
                        } else if (drop) {
                          drop();
                        }
                      });
  return SendOutcome::DeliveryScheduled;
}

std::size_t Radio::broadcast(NodeId from, MessageClass cls, std::function<void(NodeId)> on_receive) {
  if (!topo_.contains(from)) throw Error(ErrorCode::InvalidArgument, "broadcast from unknown node " + std::to_string(from));
  if (tx_hook_) tx_hook_(from, cls);
  const auto nbrs = neighbors(from, topo_, params_);
  for (NodeId to : nbrs) {
    kernel_.schedule_in(params_.tx_delay, EventKind::PacketDelivery, to, [this, from, to, cls, on_receive] {
      if (!link_up(from, to)) return;
      if (rx_hook_) rx_hook_(to, cls);
      if (on_receive) on_receive(to);
    });
  }
  return nbrs.size();
}

}  // namespace mwsn
