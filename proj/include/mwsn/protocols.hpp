#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mwsn/kernel.hpp"
#include "mwsn/mobility.hpp"
#include "mwsn/network.hpp"
#include "mwsn/random.hpp"

namespace mwsn {

enum class Protocol { MAR, GRC, GRC_R, DECA, DEMC, DEMC_R };

inline constexpr Protocol kAllProtocols[] = {Protocol::MAR,  Protocol::GRC,  Protocol::GRC_R,
                                             Protocol::DECA, Protocol::DEMC, Protocol::DEMC_R};

std::string_view to_string(Protocol p) noexcept;
std::optional<Protocol> parse_protocol(std::string_view text) noexcept;
/// MAR, GRC and GRC-R route on node locations; the rest use a hop gradient.
bool is_position_based(Protocol p) noexcept;
bool has_recovery(Protocol p) noexcept;

enum class Role : std::uint8_t { ClusterHead, Member, Unaffiliated };

struct NodeState {
  NodeId id = 0;
  Role role = Role::Unaffiliated;
  std::optional<NodeId> cluster_head;
  std::optional<NodeId> relay;  // DEMC two-hop members reach the head through this node
  double residual_energy = 1.0;
  double mobility_estimate = 0.0;
  double weight = 0.0;

  bool alive() const noexcept { return residual_energy > 0.0; }
};

struct ClusterView {
  NodeId head = 0;
  std::vector<NodeId> members;
  SimTime formed_at = 0.0;
};

/// Square cells of `cell_size` tiling the field; the last row/column is
/// clipped to the field edge.
class ZoneGrid {
 public:
  ZoneGrid(FieldGeometry field, double cell_size);

  std::size_t cols() const noexcept { return cols_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cell_count() const noexcept { return cols_ * rows_; }
  std::size_t cell_of(Vec2 p) const noexcept;
  Vec2 center(std::size_t cell) const;
  double half_diagonal(std::size_t cell) const;

 private:
  struct Rect {
    double x0, y0, x1, y1;
  };
  Rect rect(std::size_t cell) const;

  FieldGeometry field_;
  double cell_;
  std::size_t cols_;
  std::size_t rows_;
};

struct DecaWeights {
  double energy = 0.5;
  double degree = 0.3;
  double mobility = 0.2;
};

struct ProtocolConfig {
  Protocol protocol = Protocol::GRC_R;
  double round_length = 20.0;
  std::uint32_t recovery_retries = 3;
  double recovery_timeout = 2.0;
  DecaWeights deca;
  double grid_cell = 250.0;
  double grc_w_center = 0.5;
  double grc_w_energy = 0.5;
  double announce_window = 0.5;  // spread of election timers, seconds
  double mobility_window = 10.0;
  double initial_energy = 1.0;   // J
  double tx_energy = 50e-6;      // J per transmitted message
  double rx_energy = 25e-6;      // J per received message
};

void validate(const ProtocolConfig& c);

/// Seconds after a round starts by which every election has settled.
double election_settle_time(const ProtocolConfig& c, const RadioParams& r) noexcept;

/// Path length travelled over a trailing window divided by the window.
class MobilityHistory {
 public:
  void record(SimTime t, double distance);
  double estimate(SimTime now, double window) const;

 private:
  std::deque<std::pair<SimTime, double>> steps_;
  double horizon_ = 0.0;
};

struct ElectionResult {
  std::vector<NodeId> heads;                   // ascending
  std::vector<std::optional<NodeId>> head_of;  // per node; heads map to themselves
  std::vector<std::optional<NodeId>> relay_of; // DEMC two-hop members only
};

/// Greedy minimum-mobility dominating set: the least mobile uncovered node
/// (ties: lower id) becomes a head and absorbs its uncovered neighbors.
ElectionResult mar_elect(std::span<const NodeState> states, const Topology& topo, const RadioParams& r);

/// Per occupied zone, the node maximizing
///   w_center * (1 - dist_to_center / half_diagonal) + w_energy * energy / initial
/// (ties: lower id). Other nodes join the nearest head in range.
ElectionResult grc_elect(std::span<const NodeState> states, const ZoneGrid& grid, const Topology& topo,
                         const RadioParams& r, const ProtocolConfig& cfg);

struct Announcement {
  NodeId head = 0;
  double weight = 0.0;
  double distance = 0.0;
};

enum class AffiliationRule { NearestHead, HighestWeight };

/// Picks one head out of the heard announcements; ties go to the lower id.
std::optional<NodeId> affiliate(std::span<const Announcement> heard, AffiliationRule rule);

/// w_e * energy + w_c * degree/max_degree - w_m * mobility/v_max, each ratio
/// clamped to [0, 1].
double deca_weight(double energy_fraction, std::size_t degree, std::size_t max_degree, double mobility,
                   double v_max, const DecaWeights& w) noexcept;

/// Transmission record used by the message audits.
struct ControlMessage {
  SimTime time = 0.0;
  std::uint32_t round = 0;
  NodeId node = 0;
  MessageClass cls = MessageClass::Announce;
};

/// DECA: every node broadcasts one hello, then arms a timer that fires
/// earlier for heavier nodes. A node that hears a heavier announcement first
/// suppresses itself; otherwise it announces once and becomes a head.
class DecaElection {
 public:
  DecaElection(Kernel& kernel, Radio& radio, std::span<const NodeState> states, const ProtocolConfig& cfg,
               double v_max, RandomStream& jitter);

  void start();
  /// Valid once the kernel has passed start time + election_settle_time().
  ElectionResult result() const;
  const std::vector<double>& weights() const noexcept { return weight_; }
  const std::vector<std::uint32_t>& clustering_tx() const noexcept { return clustering_tx_; }
  std::size_t hello_tx() const noexcept { return hello_tx_; }

 private:
  enum class Phase : std::uint8_t { Idle, Waiting, Suppressed, Head, Dead };

  void arm_timers();
  void fire(NodeId id);

  Kernel& kernel_;
  Radio& radio_;
  const ProtocolConfig& cfg_;
  double v_max_;
  RandomStream& jitter_;
  std::vector<double> energy_frac_;
  std::vector<double> mobility_;
  std::vector<std::size_t> degree_;
  std::vector<double> weight_;
  std::vector<Phase> phase_;
  std::vector<EventHandle> timer_;
  std::vector<std::vector<Announcement>> heard_;
  std::vector<std::uint32_t> clustering_tx_;
  std::size_t hello_tx_ = 0;
};

/// DEMC: no hellos and no neighbor list. Timers depend on energy plus a
/// random jitter; only the first node to fire in a neighborhood announces.
/// One-hop hearers join silently and relay the announcement once, which
/// lets nodes two hops out join through them.
class DemcElection {
 public:
  DemcElection(Kernel& kernel, Radio& radio, std::span<const NodeState> states, const ProtocolConfig& cfg,
               RandomStream& jitter);

  /// Overrides the drawn election weights (tests).
  void set_weights(std::vector<double> w) { weight_ = std::move(w); }
  void start();
  ElectionResult result() const;
  const std::vector<double>& weights() const noexcept { return weight_; }
  const std::vector<std::uint32_t>& clustering_tx() const noexcept { return clustering_tx_; }
  std::size_t head_announcements() const noexcept { return announcements_; }
  std::size_t relays() const noexcept { return relays_; }

 private:
  enum class Phase : std::uint8_t { Waiting, Head, Member, Dead };

  void fire(NodeId id);

  Kernel& kernel_;
  Radio& radio_;
  const ProtocolConfig& cfg_;
  std::vector<double> weight_;
  std::vector<Phase> phase_;
  std::vector<EventHandle> timer_;
  std::vector<std::optional<NodeId>> head_of_;
  std::vector<std::optional<NodeId>> relay_of_;
  std::vector<std::uint32_t> clustering_tx_;
  std::size_t announcements_ = 0;
  std::size_t relays_ = 0;
};

inline constexpr std::uint32_t kNoHops = std::numeric_limits<std::uint32_t>::max();

/// Sink-rooted hop-count gradient: the sink broadcasts hop 0 and every node
/// rebroadcasts once on first hearing, so each node ends with its BFS depth.
class GradientFlood {
 public:
  GradientFlood(Kernel& kernel, Radio& radio, NodeId sink, std::size_t node_count);

  void start();
  const std::vector<std::uint32_t>& hops() const noexcept { return hops_; }
  std::size_t transmissions() const noexcept { return tx_; }

 private:
  void heard(NodeId node, std::uint32_t hops);

  Kernel& kernel_;
  Radio& radio_;
  NodeId sink_;
  std::vector<std::uint32_t> hops_;
  std::size_t tx_ = 0;
};

}  // namespace mwsn
