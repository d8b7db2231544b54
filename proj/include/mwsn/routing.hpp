#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mwsn/kernel.hpp"
#include "mwsn/metrics.hpp"
#include "mwsn/network.hpp"
#include "mwsn/protocols.hpp"

namespace mwsn {

/// A forwarding candidate as seen by the holder at decision time.
struct Candidate {
  NodeId id = 0;
  Vec2 position;
  std::uint32_t gradient = kNoHops;
};

/// Greedy geographic choice: the candidate closest to the sink among those
/// strictly closer than the holder (ties: lower id).
std::optional<NodeId> greedy_next_hop(Vec2 holder, Vec2 sink, std::span<const Candidate> candidates);
/// Hop-gradient choice: the candidate with the smallest hop count below
/// `own` (ties: lower id).
std::optional<NodeId> gradient_next_hop(std::uint32_t own, std::span<const Candidate> candidates);
/// GRC-R detour: closest to the sink among non-excluded candidates that are
/// no farther from the sink than the holder.
std::optional<NodeId> greedy_alternate(Vec2 holder, Vec2 sink, std::span<const Candidate> candidates,
                                       std::span<const NodeId> excluded);
/// DEMC-R detour: smallest hop count among non-excluded candidates with hop
/// count <= own.
std::optional<NodeId> gradient_alternate(std::uint32_t own, std::span<const Candidate> candidates,
                                         std::span<const NodeId> excluded);

inline constexpr std::size_t kMaxHops = 128;

/// One entry per node a packet reached. The distance and gradient values are
/// sampled when the previous holder picked this hop, for both ends.
struct HopRecord {
  NodeId node = 0;
  double distance_to_sink = 0.0;
  double sender_distance = 0.0;
  std::uint32_t gradient = kNoHops;
  std::uint32_t sender_gradient = kNoHops;
  bool recovery = false;  // chosen by the recovery path
};

enum class PacketFate : std::uint8_t { InFlight, Delivered, Dropped };

struct PacketRecord {
  Packet packet;
  std::vector<HopRecord> trail;
  PacketFate fate = PacketFate::InFlight;
  std::uint32_t retries_used = 0;
  std::uint32_t recover_calls = 0;
  bool intra_done = false;
  std::size_t head_hop = 0;  // trail index where inter-cluster forwarding began
};

/// Data-plane forwarding for one simulation: member to head (through a relay
/// for DEMC two-hop members), then head toward the sink with the protocol's
/// next-hop rule and, for GRC-R and DEMC-R, the recovery path.
class Router {
 public:
  Router(Kernel& kernel, Radio& radio, NodeId sink, const ProtocolConfig& cfg,
         const std::vector<std::uint32_t>& gradient);

  /// New packet at `source`. Counted as sent; dropped at once when the
  /// source has no head. A head source skips the intra-cluster leg.
  std::uint64_t originate(const NodeState& source);

  const std::vector<PacketRecord>& packets() const noexcept { return packets_; }
  /// Counters with in_flight derived from the packet table.
  RunCounters counters() const;

 private:
  void intra_hop(std::uint64_t pid, NodeId from, NodeId to, NodeId head);
  void arrive(std::uint64_t pid, const HopRecord& hop);
  void forward(std::uint64_t pid, NodeId holder);
  void send_inter(std::uint64_t pid, NodeId from, NodeId to, bool recovery_hop);
  void recover(std::uint64_t pid, NodeId holder);
  std::vector<Candidate> candidates(NodeId holder) const;
  std::optional<NodeId> primary_next_hop(NodeId holder) const;
  std::optional<NodeId> alternate_next_hop(std::uint64_t pid, NodeId holder) const;
  HopRecord hop_record(NodeId from, NodeId to, bool recovery) const;
  void deliver(std::uint64_t pid);
  void drop(std::uint64_t pid);

  Kernel& kernel_;
  Radio& radio_;
  NodeId sink_;
  const ProtocolConfig& cfg_;
  const std::vector<std::uint32_t>& gradient_;
  std::vector<PacketRecord> packets_;
  std::vector<std::vector<NodeId>> failed_;  // per packet, cleared on retry
  RunCounters counters_;
};

}  // namespace mwsn
