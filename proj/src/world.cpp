#include "mwsn/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "mwsn/error.hpp"

namespace mwsn {

namespace {

void append_line(std::string& out, const char* fmt, auto... args) {
  char buf[160];
  const int n = std::snprintf(buf, sizeof buf, fmt, args...);
  if (n > 0) out.append(buf, static_cast<std::size_t>(std::min<int>(n, sizeof buf - 1)));
}

}  // namespace

MobilityParams ScenarioConfig::effective_mobility() const {
  MobilityParams p = mobility;
  p.v_min = speed;
  p.v_max = speed;
  return p;
}

void validate(const ScenarioConfig& cfg) {
  if (cfg.node_count == 0) throw Error(ErrorCode::Config, "nodes must be >= 1");
  if (!(cfg.speed >= 0.0)) throw Error(ErrorCode::Config, "speed must be >= 0");
  if (!(cfg.duration > 0.0)) throw Error(ErrorCode::Config, "duration must be > 0");
  if (!(cfg.traffic_interval > 0.0)) throw Error(ErrorCode::Config, "traffic_interval must be > 0");
  if (!(cfg.warmdown >= 0.0)) throw Error(ErrorCode::Config, "warmdown must be >= 0");
  validate(cfg.effective_mobility(), cfg.field);
  validate(cfg.radio);
  validate(cfg.protocol);
  const double settle = election_settle_time(cfg.protocol, cfg.radio);
  if (!(settle < cfg.protocol.round_length)) throw Error(ErrorCode::Config, "round_length shorter than election settle time");
  if (!(settle < cfg.traffic_interval)) {
    throw Error(ErrorCode::Config, "traffic_interval shorter than election settle time");
  }
  if (!cfg.field.contains(cfg.sink_position())) throw Error(ErrorCode::Config, "sink must lie inside the field");
}

World::World(const ScenarioConfig& cfg, TraceOptions trace)
    : cfg_(cfg),
      mob_(cfg.effective_mobility()),
      trace_opts_(trace),
      grid_(cfg.field, cfg.protocol.grid_cell),
      sink_(static_cast<NodeId>(cfg.node_count)),
      traffic_rng_(cfg.seed, "traffic"),
      protocol_rng_(cfg.seed, "protocol") {
  validate(cfg_);
  const std::size_t n = cfg_.node_count;

  RandomStream placement(cfg_.seed, "placement");
  std::vector<Vec2> positions = init_positions(n, cfg_.field, placement);
  RandomStream shared(cfg_.seed, "mobility:shared");
  const double heading = shared.uniform(0.0, 2.0 * std::numbers::pi);
  motion_rng_.reserve(n);
  motion_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    motion_rng_.emplace_back(cfg_.seed, "mobility:" + std::to_string(i));
    motion_.push_back(init_state(positions[i], mob_, cfg_.field, motion_rng_.back(), heading));
  }
  history_.resize(n);
  positions.push_back(cfg_.sink_position());
  topo_ = Topology(std::move(positions));

  nodes_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes_[i].id = static_cast<NodeId>(i);
    nodes_[i].residual_energy = cfg_.protocol.initial_energy;
  }

  radio_ = std::make_unique<Radio>(kernel_, topo_, cfg_.radio);
  radio_->on_transmit([this](NodeId from, MessageClass cls) {
    charge(from, cfg_.protocol.tx_energy);
    if (cls != MessageClass::Data) control_log_.push_back({kernel_.now(), round_, from, cls});
  });
  radio_->on_receive([this](NodeId to, MessageClass) { charge(to, cfg_.protocol.rx_energy); });
  flood_ = std::make_unique<GradientFlood>(kernel_, *radio_, sink_, n + 1);
  router_ = std::make_unique<Router>(kernel_, *radio_, sink_, cfg_.protocol, flood_->hops());

  if (trace_opts_.events) {
    kernel_.set_trace([this](const SimEvent& ev) {
      event_trace_ += format_trace_line(ev);
      event_trace_ += '\n';
    });
  }
  if (trace_opts_.mobility) {
    for (std::size_t i = 0; i < n; ++i) {
      append_line(mobility_trace_, "%.6f\t%zu\t%.6f\t%.6f\n", 0.0, i, motion_[i].position.x, motion_[i].position.y);
    }
  }

  traffic_end_ = cfg_.duration - cfg_.warmdown;
  schedule_round(0.0);
  schedule_mobility(mob_.sample_interval);
  const double settle = election_settle_time(cfg_.protocol, cfg_.radio);
  for (std::size_t i = 0; i < n; ++i) {
    schedule_traffic(static_cast<NodeId>(i), traffic_rng_.uniform(settle, cfg_.traffic_interval));
  }
}

World::~World() = default;

const std::vector<std::uint32_t>& World::gradient() const noexcept { return flood_->hops(); }

void World::run_until(SimTime t) { kernel_.run(std::min(t, cfg_.duration)); }

RunOutput World::finish() {
  if (finished_) throw Error(ErrorCode::InvalidArgument, "run already finished");
  run_until(cfg_.duration);
  finished_ = true;
  RunOutput out;
  out.counters = router_->counters();
  out.metrics = finalize(out.counters);
  out.rounds = rounds_;
  out.control_log = control_log_;
  out.event_trace = std::move(event_trace_);
  out.mobility_trace = std::move(mobility_trace_);
  out.cluster_trace = std::move(cluster_trace_);
  out.events_dispatched = kernel_.scheduled_total() - kernel_.pending();
  return out;
}

void World::charge(NodeId node, double joules) {
  if (node >= nodes_.size()) return;  // sink
  auto& s = nodes_[node];
  if (s.residual_energy <= 0.0) return;
  s.residual_energy = std::max(0.0, s.residual_energy - joules);
  if (s.residual_energy <= 0.0) {
    topo_.set_enabled(node, false);
    s.role = Role::Unaffiliated;
    s.cluster_head.reset();
    s.relay.reset();
    release_orphans();
  }
}

void World::release_orphans() {
  for (auto& s : nodes_) {
    if (s.role != Role::Member) continue;
    if (nodes_[*s.cluster_head].role == Role::ClusterHead) continue;
    s.role = Role::Unaffiliated;
    s.cluster_head.reset();
    s.relay.reset();
  }
}

// ---------------------------------------------------------------- mobility

void World::schedule_mobility(SimTime at) {
  if (at > cfg_.duration) return;
  kernel_.schedule(at, EventKind::MobilityStep, kGlobalTarget, [this, at] {
    const double dt = mob_.sample_interval;
    for (std::size_t i = 0; i < motion_.size(); ++i) {
      if (!nodes_[i].alive()) continue;
      const Vec2 before = motion_[i].position;
      motion_[i] = step(motion_[i], mob_, dt, cfg_.field, motion_rng_[i]);
      history_[i].record(at, distance(before, motion_[i].position));
      topo_.set_position(static_cast<NodeId>(i), motion_[i].position);
      if (trace_opts_.mobility) {
        append_line(mobility_trace_, "%.6f\t%zu\t%.6f\t%.6f\n", at, i, motion_[i].position.x, motion_[i].position.y);
      }
    }
    // step count times interval avoids accumulated drift in sample times
    const double k = std::round(at / dt) + 1.0;
    schedule_mobility(k * dt);
  });
}

// ------------------------------------------------------------------ rounds

void World::schedule_round(SimTime at) {
  if (!(at < cfg_.duration)) return;
  // elect after any mobility sample due at the same instant
  kernel_.schedule(at, EventKind::RoundTimer, kGlobalTarget, [this] {
    kernel_.schedule_in(0.0, EventKind::RoundTimer, kGlobalTarget, [this] { start_round(); });
  });
}

void World::start_round() {
  const SimTime now = kernel_.now();
  ++round_;
  for (auto& s : nodes_) {
    s.role = Role::Unaffiliated;
    s.cluster_head.reset();
    s.relay.reset();
    s.mobility_estimate = history_[s.id].estimate(now, cfg_.protocol.mobility_window);
  }
  const Protocol proto = cfg_.protocol.protocol;
  switch (proto) {
    case Protocol::MAR:
    case Protocol::GRC:
    case Protocol::GRC_R: {
      const ElectionResult r = proto == Protocol::MAR ? mar_elect(nodes_, topo_, cfg_.radio)
                                                      : grc_elect(nodes_, grid_, topo_, cfg_.radio, cfg_.protocol);
      apply(r);
      for (NodeId h : r.heads) radio_->broadcast(h, MessageClass::Announce, nullptr);
      break;
    }
    case Protocol::DECA:
      deca_ = std::make_unique<DecaElection>(kernel_, *radio_, nodes_, cfg_.protocol, mob_.v_max, protocol_rng_);
      deca_->start();
      break;
    case Protocol::DEMC:
    case Protocol::DEMC_R:
      demc_ = std::make_unique<DemcElection>(kernel_, *radio_, nodes_, cfg_.protocol, protocol_rng_);
      demc_->start();
      break;
  }
  if (!is_position_based(proto)) flood_->start();
  kernel_.schedule_in(election_settle_time(cfg_.protocol, cfg_.radio), EventKind::RoundTimer, kGlobalTarget,
                      [this] { settle_round(); });
  const double next = static_cast<double>(round_) * cfg_.protocol.round_length;
  schedule_round(next);
}

void World::settle_round() {
  if (deca_) apply(deca_->result());
  if (demc_) apply(demc_->result());
  RoundRecord rec;
  rec.round = round_;
  rec.started_at = static_cast<double>(round_ - 1) * cfg_.protocol.round_length;
  std::vector<std::size_t> slot(nodes_.size(), SIZE_MAX);
  for (const auto& s : nodes_) {
    if (s.role == Role::ClusterHead) {
      slot[s.id] = rec.clusters.size();
      rec.clusters.push_back(ClusterView{s.id, {}, kernel_.now()});
    }
  }
  for (const auto& s : nodes_) {
    if (s.role == Role::Member) {
      rec.clusters[slot[*s.cluster_head]].members.push_back(s.id);
    } else if (s.role == Role::Unaffiliated && s.alive()) {
      ++rec.unaffiliated;
    }
  }
  if (trace_opts_.clusters) {
    const std::string proto(to_string(cfg_.protocol.protocol));
    for (const auto& c : rec.clusters) {
      append_line(cluster_trace_, "%u\t%s\t%u\t%zu\n", rec.round, proto.c_str(), c.head, c.members.size());
    }
  }
  rounds_.push_back(std::move(rec));
}

void World::apply(const ElectionResult& r) {
  for (auto& s : nodes_) {
    s.role = Role::Unaffiliated;
    s.cluster_head.reset();
    s.relay.reset();
    if (!s.alive() || s.id >= r.head_of.size() || !r.head_of[s.id]) continue;
    const NodeId head = *r.head_of[s.id];
    s.cluster_head = head;
    s.role = head == s.id ? Role::ClusterHead : Role::Member;
    if (s.id < r.relay_of.size() && r.relay_of[s.id]) s.relay = r.relay_of[s.id];
  }
  release_orphans();
}

// ----------------------------------------------------------------- traffic

void World::schedule_traffic(NodeId node, SimTime at) {
  if (!(at < traffic_end_)) return;
  kernel_.schedule(at, EventKind::TrafficGeneration, node, [this, node, at] {
    schedule_traffic(node, at + cfg_.traffic_interval);
    generate(node);
  });
}

void World::generate(NodeId node) {
  const NodeState& s = nodes_[node];
  if (!s.alive() || s.role == Role::ClusterHead) return;
  router_->originate(s);
}

RunOutput simulate(const ScenarioConfig& cfg, TraceOptions trace) {
  World world(cfg, trace);
  return world.finish();
}

}  // namespace mwsn
