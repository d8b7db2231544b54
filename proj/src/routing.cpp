#include "mwsn/routing.hpp"

#include <algorithm>

#include "mwsn/error.hpp"

namespace mwsn {

namespace {

bool contains(std::span<const NodeId> ids, NodeId v) { return std::find(ids.begin(), ids.end(), v) != ids.end(); }

bool closer(double d, NodeId id, double best_d, NodeId best_id) { return d < best_d || (d == best_d && id < best_id); }

}  // namespace

std::optional<NodeId> greedy_next_hop(Vec2 holder, Vec2 sink, std::span<const Candidate> candidates) {
  const double own = distance(holder, sink);
  std::optional<NodeId> best;
  double best_d = 0.0;
  for (const auto& c : candidates) {
    const double d = distance(c.position, sink);
    if (!(d < own)) continue;
    if (!best || closer(d, c.id, best_d, *best)) {
      best = c.id;
      best_d = d;
    }
  }
  return best;
}

std::optional<NodeId> gradient_next_hop(std::uint32_t own, std::span<const Candidate> candidates) {
  std::optional<NodeId> best;
  std::uint32_t best_h = 0;
  for (const auto& c : candidates) {
    if (!(c.gradient < own)) continue;
    if (!best || c.gradient < best_h || (c.gradient == best_h && c.id < *best)) {
      best = c.id;
      best_h = c.gradient;
    }
  }
  return best;
}

std::optional<NodeId> greedy_alternate(Vec2 holder, Vec2 sink, std::span<const Candidate> candidates,
                                       std::span<const NodeId> excluded) {
  const double own = distance(holder, sink);
  std::optional<NodeId> best;
  double best_d = 0.0;
  for (const auto& c : candidates) {
    if (contains(excluded, c.id)) continue;
    const double d = distance(c.position, sink);
    if (d > own) continue;
    if (!best || closer(d, c.id, best_d, *best)) {
      best = c.id;
      best_d = d;
    }
  }
  return best;
}

std::optional<NodeId> gradient_alternate(std::uint32_t own, std::span<const Candidate> candidates,
                                         std::span<const NodeId> excluded) {
  std::optional<NodeId> best;
  std::uint32_t best_h = 0;
  for (const auto& c : candidates) {
    if (contains(excluded, c.id) || c.gradient > own) continue;
    if (!best || c.gradient < best_h || (c.gradient == best_h && c.id < *best)) {
      best = c.id;
      best_h = c.gradient;
    }
  }
  return best;
}

Router::Router(Kernel& kernel, Radio& radio, NodeId sink, const ProtocolConfig& cfg,
               const std::vector<std::uint32_t>& gradient)
    : kernel_(kernel), radio_(radio), sink_(sink), cfg_(cfg), gradient_(gradient) {
  if (!radio.topology().contains(sink)) throw Error(ErrorCode::InvalidArgument, "sink is not part of the topology");
}

RunCounters Router::counters() const {
  RunCounters c = counters_;
  c.in_flight = static_cast<std::uint64_t>(std::count_if(
      packets_.begin(), packets_.end(), [](const PacketRecord& p) { return p.fate == PacketFate::InFlight; }));
  return c;
}

HopRecord Router::hop_record(NodeId from, NodeId to, bool recovery) const {
  const auto& topo = radio_.topology();
  const Vec2 sink = topo.position(sink_);
  auto grad = [this](NodeId v) { return v < gradient_.size() ? gradient_[v] : kNoHops; };
  return {to, distance(topo.position(to), sink), distance(topo.position(from), sink), grad(to), grad(from), recovery};
}

std::uint64_t Router::originate(const NodeState& source) {
  const std::uint64_t pid = packets_.size();
  PacketRecord rec;
  rec.packet.id = pid;
  rec.packet.source = source.id;
  rec.packet.created_at = kernel_.now();
  rec.packet.hops.push_back(source.id);
  rec.trail.push_back(hop_record(source.id, source.id, false));
  packets_.push_back(std::move(rec));
  failed_.emplace_back();
  ++counters_.sent;
  if (!source.alive() || !source.cluster_head || source.role == Role::Unaffiliated) {
    drop(pid);
  } else if (source.role == Role::ClusterHead) {
    packets_[pid].intra_done = true;
    forward(pid, source.id);
  } else {
    intra_hop(pid, source.id, source.relay.value_or(*source.cluster_head), *source.cluster_head);
  }
  return pid;
}

void Router::intra_hop(std::uint64_t pid, NodeId from, NodeId to, NodeId head) {
  const auto outcome = radio_.unicast(
      from, to, MessageClass::Data,
      [this, pid, to, head, hop = hop_record(from, to, false)] {
        auto& p = packets_[pid];
        p.packet.hops.push_back(to);
        p.trail.push_back(hop);
        if (to == head) {
          p.intra_done = true;
          p.head_hop = p.trail.size() - 1;
          forward(pid, head);
        } else {
          intra_hop(pid, to, head, head);
        }
      },
      [this, pid] { drop(pid); });
  if (outcome == SendOutcome::DroppedOutOfRange) drop(pid);
}

void Router::arrive(std::uint64_t pid, const HopRecord& hop) {
  auto& p = packets_[pid];
  p.packet.hops.push_back(hop.node);
  p.trail.push_back(hop);
  if (hop.node == sink_) {
    deliver(pid);
  } else {
    forward(pid, hop.node);
  }
}

void Router::forward(std::uint64_t pid, NodeId holder) {
  auto& p = packets_[pid];
  if (p.fate != PacketFate::InFlight) return;
  if (!radio_.topology().enabled(holder) || p.trail.size() > kMaxHops) {
    drop(pid);
    return;
  }
  if (auto next = primary_next_hop(holder)) {
    send_inter(pid, holder, *next, false);
  } else if (has_recovery(cfg_.protocol)) {
    recover(pid, holder);
  } else {
    drop(pid);
  }
}

void Router::send_inter(std::uint64_t pid, NodeId from, NodeId to, bool recovery_hop) {
  auto failed = [this, pid, from, to] {
    if (has_recovery(cfg_.protocol)) {
      failed_[pid].push_back(to);
      recover(pid, from);
    } else {
      drop(pid);
    }
  };
  const auto outcome = radio_.unicast(
      from, to, MessageClass::Data, [this, pid, hop = hop_record(from, to, recovery_hop)] { arrive(pid, hop); },
      failed);
  if (outcome == SendOutcome::DroppedOutOfRange) failed();
}

void Router::recover(std::uint64_t pid, NodeId holder) {
  auto& p = packets_[pid];
  if (p.fate != PacketFate::InFlight) return;
  ++p.recover_calls;
  if (auto alt = alternate_next_hop(pid, holder)) {
    send_inter(pid, holder, *alt, true);
    return;
  }
  if (p.retries_used >= cfg_.recovery_retries) {
    drop(pid);
    return;
  }
  ++p.retries_used;
  kernel_.schedule_in(cfg_.recovery_timeout, EventKind::RecoveryTimeout, holder, [this, pid, holder] {
    failed_[pid].clear();
    if (packets_[pid].fate != PacketFate::InFlight) return;
    if (!radio_.topology().enabled(holder)) {
      drop(pid);
      return;
    }
    if (auto next = primary_next_hop(holder)) {
      send_inter(pid, holder, *next, false);
    } else {
      recover(pid, holder);
    }
  });
}

std::vector<Candidate> Router::candidates(NodeId holder) const {
  const auto& topo = radio_.topology();
  std::vector<Candidate> out;
  for (NodeId v : neighbors(holder, topo, radio_.params())) {
    out.push_back({v, topo.position(v), v < gradient_.size() ? gradient_[v] : kNoHops});
  }
  return out;
}

std::optional<NodeId> Router::primary_next_hop(NodeId holder) const {
  const auto c = candidates(holder);
  const auto& topo = radio_.topology();
  if (is_position_based(cfg_.protocol)) return greedy_next_hop(topo.position(holder), topo.position(sink_), c);
  return gradient_next_hop(holder < gradient_.size() ? gradient_[holder] : kNoHops, c);
}

std::optional<NodeId> Router::alternate_next_hop(std::uint64_t pid, NodeId holder) const {
  const auto c = candidates(holder);
  std::vector<NodeId> excluded = failed_[pid];
  const auto& hops = packets_[pid].packet.hops;
  excluded.insert(excluded.end(), hops.begin(), hops.end());
  const auto& topo = radio_.topology();
  if (is_position_based(cfg_.protocol)) {
    return greedy_alternate(topo.position(holder), topo.position(sink_), c, excluded);
  }
  return gradient_alternate(holder < gradient_.size() ? gradient_[holder] : kNoHops, c, excluded);
}

void Router::deliver(std::uint64_t pid) {
  auto& p = packets_[pid];
  if (p.fate == PacketFate::Delivered) {
    ++counters_.duplicates;
    return;
  }
  if (p.fate == PacketFate::Dropped) return;
  p.fate = PacketFate::Delivered;
  p.packet.delivered_at = kernel_.now();
  ++counters_.delivered_unique;
}

void Router::drop(std::uint64_t pid) {
  auto& p = packets_[pid];
  if (p.fate != PacketFate::InFlight) return;
  p.fate = PacketFate::Dropped;
  ++counters_.dropped;
}

}  // namespace mwsn
