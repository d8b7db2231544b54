#include "mwsn/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mwsn/error.hpp"

namespace mwsn {

std::string_view to_string(Protocol p) noexcept {
  switch (p) {
    case Protocol::MAR: return "MAR";
    case Protocol::GRC: return "GRC";
    case Protocol::GRC_R: return "GRC-R";
    case Protocol::DECA: return "DECA";
    case Protocol::DEMC: return "DEMC";
    case Protocol::DEMC_R: return "DEMC-R";
  }
  return "unknown";
}

std::optional<Protocol> parse_protocol(std::string_view text) noexcept {
  for (Protocol p : kAllProtocols) {
    if (text == to_string(p)) return p;
  }
  return std::nullopt;
}

bool is_position_based(Protocol p) noexcept {
  return p == Protocol::MAR || p == Protocol::GRC || p == Protocol::GRC_R;
}

bool has_recovery(Protocol p) noexcept { return p == Protocol::GRC_R || p == Protocol::DEMC_R; }

void validate(const ProtocolConfig& c) {
  if (!(c.round_length > 0.0)) throw Error(ErrorCode::Config, "round_length must be > 0");
  if (!(c.recovery_timeout > 0.0)) throw Error(ErrorCode::Config, "recovery_timeout must be > 0");
  if (!(c.grid_cell > 0.0)) throw Error(ErrorCode::Config, "grid_cell must be > 0");
  if (!(c.announce_window > 0.0)) throw Error(ErrorCode::Config, "announce_window must be > 0");
  if (!(c.mobility_window > 0.0)) throw Error(ErrorCode::Config, "mobility_window must be > 0");
  if (!(c.initial_energy > 0.0)) throw Error(ErrorCode::Config, "initial_energy must be > 0");
  if (!(c.tx_energy >= 0.0) || !(c.rx_energy >= 0.0)) throw Error(ErrorCode::Config, "message energy must be >= 0");
  const auto& w = c.deca;
  if (!(w.energy >= 0.0) || !(w.degree >= 0.0) || !(w.mobility >= 0.0) ||
      std::abs(w.energy + w.degree + w.mobility - 1.0) > 1e-9) {
    throw Error(ErrorCode::Config, "deca weights must be non-negative and sum to 1");
  }
  if (!(c.grc_w_center >= 0.0) || !(c.grc_w_energy >= 0.0)) throw Error(ErrorCode::Config, "grc weights must be >= 0");
}

double election_settle_time(const ProtocolConfig& c, const RadioParams& r) noexcept {
  // hello spread + timer window (DECA weights reach -w_m) + jitter + relay hops
  return 0.2 + 1.3 * c.announce_window + 4.0 * r.tx_delay;
}

// ---------------------------------------------------------------- ZoneGrid

ZoneGrid::ZoneGrid(FieldGeometry field, double cell_size) : field_(field), cell_(cell_size) {
  if (!(cell_size > 0.0)) throw Error(ErrorCode::InvalidArgument, "zone cell size must be > 0");
  cols_ = static_cast<std::size_t>(std::ceil(field.width / cell_size));
  rows_ = static_cast<std::size_t>(std::ceil(field.height / cell_size));
  cols_ = std::max<std::size_t>(cols_, 1);
  rows_ = std::max<std::size_t>(rows_, 1);
}

std::size_t ZoneGrid::cell_of(Vec2 p) const noexcept {
  auto idx = [this](double v, std::size_t n) {
    if (!(v > 0.0)) return std::size_t{0};
    return std::min(static_cast<std::size_t>(v / cell_), n - 1);
  };
  return idx(p.y, rows_) * cols_ + idx(p.x, cols_);
}

ZoneGrid::Rect ZoneGrid::rect(std::size_t cell) const {
  if (cell >= cell_count()) throw Error(ErrorCode::InvalidArgument, "zone index out of range");
  const double x0 = static_cast<double>(cell % cols_) * cell_;
  const double y0 = static_cast<double>(cell / cols_) * cell_;
  return {x0, y0, std::min(x0 + cell_, field_.width), std::min(y0 + cell_, field_.height)};
}

Vec2 ZoneGrid::center(std::size_t cell) const {
  const Rect r = rect(cell);
  return {(r.x0 + r.x1) / 2.0, (r.y0 + r.y1) / 2.0};
}

double ZoneGrid::half_diagonal(std::size_t cell) const {
  const Rect r = rect(cell);
  return std::hypot(r.x1 - r.x0, r.y1 - r.y0) / 2.0;
}

// --------------------------------------------------------- MobilityHistory

void MobilityHistory::record(SimTime t, double distance) {
  steps_.emplace_back(t, distance);
  horizon_ = std::max(horizon_, t);
  // keep a generous tail; estimate() filters by window anyway
  while (steps_.size() > 4096) steps_.pop_front();
}

double MobilityHistory::estimate(SimTime now, double window) const {
  if (!(window > 0.0)) throw Error(ErrorCode::InvalidArgument, "mobility window must be > 0");
  double path = 0.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    if (it->first <= now - window) break;
    if (it->first <= now) path += it->second;
  }
  return path / window;
}

// --------------------------------------------------------------- elections

namespace {

ElectionResult empty_result(std::size_t n) {
  ElectionResult r;
  r.head_of.assign(n, std::nullopt);
  r.relay_of.assign(n, std::nullopt);
  return r;
}

bool usable(const NodeState& s, const Topology& topo) { return s.alive() && topo.enabled(s.id); }

}  // namespace

ElectionResult mar_elect(std::span<const NodeState> states, const Topology& topo, const RadioParams& r) {
  const std::size_t n = states.size();
  ElectionResult out = empty_result(n);
  std::vector<NodeId> order;
  for (const auto& s : states) {
    if (usable(s, topo)) order.push_back(s.id);
  }
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    if (states[a].mobility_estimate != states[b].mobility_estimate) {
      return states[a].mobility_estimate < states[b].mobility_estimate;
    }
    return a < b;
  });
  for (NodeId candidate : order) {
    if (out.head_of[candidate]) continue;
    out.heads.push_back(candidate);
    out.head_of[candidate] = candidate;
    const Vec2 hp = topo.position(candidate);
    for (NodeId other : order) {
      if (!out.head_of[other] && in_range(hp, topo.position(other), r)) out.head_of[other] = candidate;
    }
  }
  std::sort(out.heads.begin(), out.heads.end());
  return out;
}

ElectionResult grc_elect(std::span<const NodeState> states, const ZoneGrid& grid, const Topology& topo,
                         const RadioParams& r, const ProtocolConfig& cfg) {
  const std::size_t n = states.size();
  ElectionResult out = empty_result(n);
  std::vector<std::optional<NodeId>> best(grid.cell_count());
  std::vector<double> best_score(grid.cell_count(), 0.0);
  for (const auto& s : states) {
    if (!usable(s, topo)) continue;
    const Vec2 p = topo.position(s.id);
    const std::size_t cell = grid.cell_of(p);
    const double centerness = 1.0 - distance(p, grid.center(cell)) / grid.half_diagonal(cell);
    const double score = cfg.grc_w_center * centerness + cfg.grc_w_energy * (s.residual_energy / cfg.initial_energy);
    // states are visited in ascending id, so strict > keeps the lower id on ties
    if (!best[cell] || score > best_score[cell]) {
      best[cell] = s.id;
      best_score[cell] = score;
    }
  }
  for (const auto& h : best) {
    if (h) {
      out.heads.push_back(*h);
      out.head_of[*h] = *h;
    }
  }
  std::sort(out.heads.begin(), out.heads.end());
  for (const auto& s : states) {
    if (!usable(s, topo) || out.head_of[s.id]) continue;
    std::vector<Announcement> heard;
    const Vec2 p = topo.position(s.id);
    for (NodeId h : out.heads) {
      const Vec2 hp = topo.position(h);
      if (in_range(p, hp, r)) heard.push_back({h, 0.0, distance(p, hp)});
    }
    out.head_of[s.id] = affiliate(heard, AffiliationRule::NearestHead);
  }
  return out;
}

std::optional<NodeId> affiliate(std::span<const Announcement> heard, AffiliationRule rule) {
  std::optional<NodeId> pick;
  const Announcement* best = nullptr;
  for (const auto& a : heard) {
    bool better = false;
    if (!best) {
      better = true;
    } else if (rule == AffiliationRule::NearestHead) {
      better = a.distance < best->distance || (a.distance == best->distance && a.head < best->head);
    } else {
      better = a.weight > best->weight || (a.weight == best->weight && a.head < best->head);
    }
    if (better) best = &a;
  }
  if (best) pick = best->head;
  return pick;
}

double deca_weight(double energy_fraction, std::size_t degree, std::size_t max_degree, double mobility,
                   double v_max, const DecaWeights& w) noexcept {
  const double e = std::clamp(energy_fraction, 0.0, 1.0);
  const double c = max_degree > 0 ? static_cast<double>(degree) / static_cast<double>(max_degree) : 0.0;
  const double m = v_max > 0.0 ? std::clamp(mobility / v_max, 0.0, 1.0) : 0.0;
  return w.energy * e + w.degree * c - w.mobility * m;
}

// -------------------------------------------------------------------- DECA

namespace {
constexpr double kHelloSpread = 0.05;
constexpr double kHelloPhase = 0.1;
constexpr double kJitterFraction = 0.01;
}  // namespace

DecaElection::DecaElection(Kernel& kernel, Radio& radio, std::span<const NodeState> states,
                           const ProtocolConfig& cfg, double v_max, RandomStream& jitter)
    : kernel_(kernel), radio_(radio), cfg_(cfg), v_max_(v_max), jitter_(jitter) {
  const std::size_t n = states.size();
  energy_frac_.resize(n);
  mobility_.resize(n);
  degree_.assign(n, 0);
  weight_.assign(n, 0.0);
  phase_.assign(n, Phase::Idle);
  timer_.assign(n, EventHandle{});
  heard_.assign(n, {});
  clustering_tx_.assign(n, 0);
  for (const auto& s : states) {
    energy_frac_[s.id] = s.residual_energy / cfg.initial_energy;
    mobility_[s.id] = s.mobility_estimate;
    if (!s.alive() || !radio.topology().enabled(s.id)) phase_[s.id] = Phase::Dead;
  }
}

void DecaElection::start() {
  const std::size_t n = phase_.size();
  for (NodeId i = 0; i < n; ++i) {
    if (phase_[i] == Phase::Dead) continue;
    const double at = jitter_.uniform(0.0, kHelloSpread);
    kernel_.schedule_in(at, EventKind::RoundTimer, i, [this, i] {
      ++hello_tx_;
      radio_.broadcast(i, MessageClass::Hello, [this](NodeId to) {
        if (to < degree_.size()) ++degree_[to];
      });
    });
  }
  kernel_.schedule_in(kHelloPhase, EventKind::RoundTimer, kGlobalTarget, [this] { arm_timers(); });
}

void DecaElection::arm_timers() {
  const std::size_t n = phase_.size();
  std::size_t max_degree = 0;
  for (NodeId i = 0; i < n; ++i) {
    if (phase_[i] != Phase::Dead) max_degree = std::max(max_degree, degree_[i]);
  }
  for (NodeId i = 0; i < n; ++i) {
    if (phase_[i] == Phase::Dead) continue;
    weight_[i] = deca_weight(energy_frac_[i], degree_[i], max_degree, mobility_[i], v_max_, cfg_.deca);
    const double delay = std::max(0.0, cfg_.announce_window * (1.0 - weight_[i])) +
                         jitter_.uniform(0.0, kJitterFraction * cfg_.announce_window);
    phase_[i] = Phase::Waiting;
    timer_[i] = kernel_.schedule_in(delay, EventKind::RoundTimer, i, [this, i] { fire(i); });
  }
}

void DecaElection::fire(NodeId id) {
  if (phase_[id] != Phase::Waiting) return;
  phase_[id] = Phase::Head;
  ++clustering_tx_[id];
  const double w = weight_[id];
  radio_.broadcast(id, MessageClass::Announce, [this, id, w](NodeId to) {
    if (to >= phase_.size()) return;
    const Vec2 a = radio_.topology().position(id);
    const Vec2 b = radio_.topology().position(to);
    heard_[to].push_back({id, w, distance(a, b)});
    if (phase_[to] != Phase::Waiting) return;
    const bool heavier = w > weight_[to] || (w == weight_[to] && id > to);
    if (heavier) {
      kernel_.cancel(timer_[to]);
      phase_[to] = Phase::Suppressed;
    }
  });
}

ElectionResult DecaElection::result() const {
  ElectionResult out = empty_result(phase_.size());
  for (NodeId i = 0; i < phase_.size(); ++i) {
    if (phase_[i] == Phase::Head) {
      out.heads.push_back(i);
      out.head_of[i] = i;
    }
  }
  for (NodeId i = 0; i < phase_.size(); ++i) {
    if (phase_[i] == Phase::Suppressed) out.head_of[i] = affiliate(heard_[i], AffiliationRule::HighestWeight);
  }
  return out;
}

// -------------------------------------------------------------------- DEMC

DemcElection::DemcElection(Kernel& kernel, Radio& radio, std::span<const NodeState> states,
                           const ProtocolConfig& cfg, RandomStream& jitter)
    : kernel_(kernel), radio_(radio), cfg_(cfg) {
  const std::size_t n = states.size();
  weight_.assign(n, 0.0);
  phase_.assign(n, Phase::Waiting);
  timer_.assign(n, EventHandle{});
  head_of_.assign(n, std::nullopt);
  relay_of_.assign(n, std::nullopt);
  clustering_tx_.assign(n, 0);
  for (const auto& s : states) {
    if (!s.alive() || !radio.topology().enabled(s.id)) {
      phase_[s.id] = Phase::Dead;
      continue;
    }
    weight_[s.id] = 0.5 * std::clamp(s.residual_energy / cfg.initial_energy, 0.0, 1.0) +
                    0.5 * jitter.uniform(0.0, 1.0);
  }
}

void DemcElection::start() {
  for (NodeId i = 0; i < phase_.size(); ++i) {
    if (phase_[i] == Phase::Dead) continue;
    const double delay = cfg_.announce_window * (1.0 - std::clamp(weight_[i], 0.0, 1.0));
    timer_[i] = kernel_.schedule_in(delay, EventKind::RoundTimer, i, [this, i] { fire(i); });
  }
}

void DemcElection::fire(NodeId id) {
  if (phase_[id] != Phase::Waiting) return;
  phase_[id] = Phase::Head;
  head_of_[id] = id;
  ++clustering_tx_[id];
  ++announcements_;
  radio_.broadcast(id, MessageClass::Announce, [this, id](NodeId to) {
    if (to >= phase_.size() || phase_[to] != Phase::Waiting) return;
    kernel_.cancel(timer_[to]);
    phase_[to] = Phase::Member;
    head_of_[to] = id;
    ++clustering_tx_[to];
    ++relays_;
    radio_.broadcast(to, MessageClass::Relay, [this, id, to](NodeId far) {
      if (far >= phase_.size() || phase_[far] != Phase::Waiting) return;
      kernel_.cancel(timer_[far]);
      phase_[far] = Phase::Member;
      head_of_[far] = id;
      relay_of_[far] = to;
    });
  });
}

ElectionResult DemcElection::result() const {
  ElectionResult out = empty_result(phase_.size());
  for (NodeId i = 0; i < phase_.size(); ++i) {
    if (phase_[i] == Phase::Head) out.heads.push_back(i);
    out.head_of[i] = head_of_[i];
    out.relay_of[i] = relay_of_[i];
  }
  return out;
}

// ----------------------------------------------------------- GradientFlood

GradientFlood::GradientFlood(Kernel& kernel, Radio& radio, NodeId sink, std::size_t node_count)
    : kernel_(kernel), radio_(radio), sink_(sink), hops_(node_count, kNoHops) {}

void GradientFlood::start() {
  std::fill(hops_.begin(), hops_.end(), kNoHops);
  heard(sink_, 0);
}

void GradientFlood::heard(NodeId node, std::uint32_t hops) {
  if (node >= hops_.size() || hops_[node] != kNoHops) return;
  hops_[node] = hops;
  ++tx_;
  radio_.broadcast(node, MessageClass::Gradient, [this, hops](NodeId to) { heard(to, hops + 1); });
}

}  // namespace mwsn
