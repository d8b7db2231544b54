#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mwsn/kernel.hpp"
#include "mwsn/metrics.hpp"
#include "mwsn/mobility.hpp"
#include "mwsn/network.hpp"
#include "mwsn/protocols.hpp"
#include "mwsn/random.hpp"
#include "mwsn/routing.hpp"

namespace mwsn {

/// Everything one replication needs. `speed` pins v_min = v_max.
struct ScenarioConfig {
  std::size_t node_count = 100;
  FieldGeometry field;
  double speed = 10.0;
  std::uint64_t seed = 1;
  double duration = 900.0;
  MobilityParams mobility;
  RadioParams radio;
  ProtocolConfig protocol;
  double traffic_interval = 10.0;
  double warmdown = 30.0;
  std::optional<Vec2> sink;  // defaults to the field center

  MobilityParams effective_mobility() const;
  Vec2 sink_position() const { return sink.value_or(field.center()); }
};

/// Throws Error(Config) naming the offending setting.
void validate(const ScenarioConfig& cfg);

struct TraceOptions {
  bool events = false;
  bool mobility = false;
  bool clusters = false;
};

struct RoundRecord {
  std::uint32_t round = 0;
  SimTime started_at = 0.0;
  std::vector<ClusterView> clusters;
  std::size_t unaffiliated = 0;
};

struct RunOutput {
  MetricsRecord metrics;
  RunCounters counters;
  std::vector<RoundRecord> rounds;
  std::vector<ControlMessage> control_log;  // every non-data transmission
  std::string event_trace;
  std::string mobility_trace;
  std::string cluster_trace;
  std::uint64_t events_dispatched = 0;
};

/// One sealed simulation: nodes, sink, radio, protocol, traffic. Node ids
/// 0..n-1 are sensors; id n is the sink.
class World {
 public:
  explicit World(const ScenarioConfig& cfg, TraceOptions trace = {});
  ~World();
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  /// Advances to min(t, duration).
  void run_until(SimTime t);
  /// Runs to the configured duration and finalizes metrics.
  RunOutput finish();

  const ScenarioConfig& config() const noexcept { return cfg_; }
  Kernel& kernel() noexcept { return kernel_; }
  const Topology& topology() const noexcept { return topo_; }
  const std::vector<NodeState>& nodes() const noexcept { return nodes_; }
  const std::vector<PacketRecord>& packets() const noexcept { return router_->packets(); }
  const std::vector<std::uint32_t>& gradient() const noexcept;
  NodeId sink() const noexcept { return sink_; }
  std::uint32_t round() const noexcept { return round_; }
  const std::vector<RoundRecord>& rounds() const noexcept { return rounds_; }
  RunCounters counters() const { return router_->counters(); }

 private:
  void schedule_mobility(SimTime at);
  void schedule_round(SimTime at);
  void schedule_traffic(NodeId node, SimTime at);
  void start_round();
  void settle_round();
  void apply(const ElectionResult& r);
  void release_orphans();  // members whose head is gone become unaffiliated
  void generate(NodeId node);


  void charge(NodeId node, double joules);

  ScenarioConfig cfg_;
  MobilityParams mob_;
  TraceOptions trace_opts_;
  Kernel kernel_;
  Topology topo_;
  std::unique_ptr<Radio> radio_;
  ZoneGrid grid_;
  NodeId sink_;
  std::vector<NodeState> nodes_;
  std::vector<MobilityState> motion_;
  std::vector<RandomStream> motion_rng_;
  std::vector<MobilityHistory> history_;
  RandomStream traffic_rng_;
  RandomStream protocol_rng_;
  std::unique_ptr<DecaElection> deca_;
  std::unique_ptr<DemcElection> demc_;
  std::unique_ptr<GradientFlood> flood_;
  std::unique_ptr<Router> router_;
  std::vector<RoundRecord> rounds_;
  std::vector<ControlMessage> control_log_;
  std::uint32_t round_ = 0;
  SimTime traffic_end_ = 0.0;
  std::string event_trace_;
  std::string mobility_trace_;
  std::string cluster_trace_;
  bool finished_ = false;
};

RunOutput simulate(const ScenarioConfig& cfg, TraceOptions trace = {});

}  // namespace mwsn
