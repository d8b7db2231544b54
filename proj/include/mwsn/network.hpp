#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mwsn/geometry.hpp"
#include "mwsn/kernel.hpp"

namespace mwsn {

struct RadioParams {
  double range = 130.0;     // meters, unit-disk radius (inclusive)
  double tx_delay = 0.005;  // seconds per hop
};

void validate(const RadioParams& r);

/// Unit-disk test with an inclusive boundary.
inline bool in_range(Vec2 a, Vec2 b, const RadioParams& r) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy <= r.range * r.range;
}

/// Live node positions plus a per-node enabled flag (dead nodes are
/// invisible to the radio).
class Topology {
 public:
  Topology() = default;
  explicit Topology(std::vector<Vec2> positions);

  std::size_t size() const noexcept { return positions_.size(); }
  bool contains(NodeId id) const noexcept { return id < positions_.size(); }

  Vec2 position(NodeId id) const;
  void set_position(NodeId id, Vec2 p);
  bool enabled(NodeId id) const;
  void set_enabled(NodeId id, bool on);

  const std::vector<Vec2>& positions() const noexcept { return positions_; }

 private:
  std::vector<Vec2> positions_;
  std::vector<char> enabled_;
};

/// All enabled nodes other than `node` within range, ascending id. Throws
/// Error(InvalidArgument) for an unknown id.
std::vector<NodeId> neighbors(NodeId node, const Topology& topo, const RadioParams& r);

struct Packet {
  std::uint64_t id = 0;
  NodeId source = 0;
  SimTime created_at = 0.0;
  std::vector<NodeId> hops;
  std::optional<SimTime> delivered_at;
};

enum class MessageClass : std::uint8_t { Data, Hello, Announce, Relay, Gradient };

const char* to_string(MessageClass c) noexcept;

enum class SendOutcome { DeliveryScheduled, DroppedOutOfRange };

/// Message delivery over the unit-disk channel. A scheduled hop still fails
/// if the pair has separated by the time the delivery event fires.
class Radio {
 public:
  using TxHook = std::function<void(NodeId from, MessageClass cls)>;
  using RxHook = std::function<void(NodeId to, MessageClass cls)>;

  Radio(Kernel& kernel, const Topology& topo, RadioParams params) : kernel_(kernel), topo_(topo), params_(params) {}

  /// Out-of-range at send time returns DroppedOutOfRange without invoking
  /// either callback. Otherwise exactly one of on_receive/on_drop runs at
  /// now + tx_delay.
  SendOutcome unicast(NodeId from, NodeId to, MessageClass cls, std::function<void()> on_receive,
                      std::function<void()> on_drop = {});

  /// One delivery per current neighbor; returns how many were scheduled.
  std::size_t broadcast(NodeId from, MessageClass cls, std::function<void(NodeId)> on_receive);

  void on_transmit(TxHook hook) { tx_hook_ = std::move(hook); }
  void on_receive(RxHook hook) { rx_hook_ = std::move(hook); }

  const RadioParams& params() const noexcept { return params_; }
  const Topology& topology() const noexcept { return topo_; }

 private:
  bool link_up(NodeId a, NodeId b) const;

  Kernel& kernel_;
  const Topology& topo_;
  RadioParams params_;
  TxHook tx_hook_;
  RxHook rx_hook_;
};

}  // namespace mwsn
