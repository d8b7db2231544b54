// Acceptance harness: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mwsn/experiment.hpp"
#include "mwsn/kernel.hpp"
#include "mwsn/metrics.hpp"
#include "mwsn/mobility.hpp"
#include "mwsn/random.hpp"
#include "reference_mobility.hpp"

using namespace mwsn;

namespace {

constexpr double kMaxStaticRunSeconds = 5.0;
constexpr double kMinRecoveryGain = 0.02;
constexpr int kMinOrderedProtocols = 5;
constexpr double kOracleTolerance = 1e-9;
constexpr double kSpeedConservation = 1e-12;
constexpr double kIdentityTolerance = 1e-9;
constexpr double kSweepSpeed = 10.0;
constexpr std::uint64_t kSeeds = 20;

const MobilityModel kModels[] = {MobilityModel::RandomWaypoint, MobilityModel::Mass, MobilityModel::Linear};

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
};

int g_failed = 0;

void report(const char* id, const char* title, const Verdict& v) {
  std::printf("%s %s %s: %s\n", id, v.pass ? "PASS" : "FAIL", title, v.detail.c_str());
  std::fflush(stdout);
  g_failed += v.pass ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

template <typename T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& f) {
  std::vector<T> out(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) out[i] = f(i);
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(workers(), n); ++t) pool.emplace_back(work);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? NAN : s / static_cast<double>(v.size());
}

SweepSpec speed10_spec() {
  SweepSpec s;
  s.protocols.assign(std::begin(kAllProtocols), std::end(kAllProtocols));
  s.models.assign(std::begin(kModels), std::end(kModels));
  s.speeds = {kSweepSpeed};
  for (std::uint64_t i = 1; i <= kSeeds; ++i) s.seeds.push_back(i);
  return s;
}

// Per-run rows of a sweep CSV, keyed by (protocol, mobility).
struct SweepTable {
  std::map<std::pair<std::string, std::string>, std::vector<double>> pdr_unique, loss;
  std::size_t rows = 0, failed_rows = 0, partition_violations = 0;
};

SweepTable tabulate(const std::string& csv) {
  SweepTable t;
  const auto lines = split(csv, '\n');
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split(lines[i], ',');
    if (f.size() != 14 || f[3] == "mean") continue;
    ++t.rows;
    if (f[5].empty() || f[12].empty()) {
      ++t.failed_rows;
      continue;
    }
    const auto sent = std::stoull(f[5]), uniq = std::stoull(f[6]), dropped = std::stoull(f[8]),
               in_flight = std::stoull(f[9]);
    if (sent != uniq + dropped + in_flight) ++t.partition_violations;
    t.pdr_unique[{f[0], f[1]}].push_back(std::stod(f[12]));
    t.loss[{f[0], f[1]}].push_back(std::stod(f[10]));
  }
  return t;
}

std::string name(Protocol p) { return std::string(to_string(p)); }
std::string name(MobilityModel m) { return std::string(to_string(m)); }

// ------------------------------------------------------------------ AC1

Verdict static_sanity(std::vector<MetricsRecord>& finalized) {
  Verdict v;
  double slowest = 0;
  int runs = 0;
  for (Protocol p : kAllProtocols) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      ScenarioConfig c;
      c.protocol.protocol = p;
      c.speed = 0;
      c.seed = seed;
      c.radio.range = 300;
      const auto t0 = std::chrono::steady_clock::now();
      const auto r = run_one(c);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      slowest = std::max(slowest, secs);
      ++runs;
      const auto& m = r.output.metrics;
      finalized.push_back(m);
      if (!m.pdr_unique || *m.pdr_unique != 1.0 || *m.loss_pct != 0.0) {
        v.fail(fmt("%s seed %llu: pdr_unique %s loss %s", name(p).c_str(), static_cast<unsigned long long>(seed),
                   m.pdr_unique ? fmt("%.6f", *m.pdr_unique).c_str() : "n/a",
                   m.loss_pct ? fmt("%.6f", *m.loss_pct).c_str() : "n/a"));
      }
      if (secs >= kMaxStaticRunSeconds) v.fail(fmt("%s seed %llu took %.2f s", name(p).c_str(), static_cast<unsigned long long>(seed), secs));
    }
  }
  if (v.pass) v.detail = fmt("%d runs, pdr_unique 1.000000, loss 0.000000, slowest %.3f s", runs, slowest);
  return v;
}

// ------------------------------------------------------------------ AC2-4

Verdict recovery_benefit(const SweepTable& t) {
  Verdict v;
  std::string d;
  for (MobilityModel m : kModels) {
    const auto mn = name(m);
    const double grc = mean(t.pdr_unique.at({"GRC", mn})), grcr = mean(t.pdr_unique.at({"GRC-R", mn}));
    const double demc = mean(t.pdr_unique.at({"DEMC", mn})), demcr = mean(t.pdr_unique.at({"DEMC-R", mn}));
    d += fmt("%s%s GRC-R-GRC %+.4f DEMC-R-DEMC %+.4f", d.empty() ? "" : "; ", mn.c_str(), grcr - grc, demcr - demc);
    if (!(grcr - grc >= kMinRecoveryGain)) v.fail(fmt("%s GRC-R gain %+.4f < %.2f", mn.c_str(), grcr - grc, kMinRecoveryGain));
    if (!(demcr - demc >= kMinRecoveryGain)) {
      v.fail(fmt("%s DEMC-R gain %+.4f < %.2f", mn.c_str(), demcr - demc, kMinRecoveryGain));
    }
  }
  if (v.pass) v.detail = d;
  else v.detail += " (" + d + ")";
  return v;
}

Verdict loss_ordering(const SweepTable& t) {
  Verdict v;
  int ordered = 0;
  std::string d, misses;
  for (Protocol p : kAllProtocols) {
    const auto pn = name(p);
    const double rwp = mean(t.loss.at({pn, "rwp"})), mass = mean(t.loss.at({pn, "mass"})),
                 lin = mean(t.loss.at({pn, "linear"}));
    const bool ok = mass > rwp && rwp > lin;
    ordered += ok;
    d += fmt("%s%s %.2f>%.2f>%.2f", d.empty() ? "" : ", ", pn.c_str(), mass, rwp, lin);
    if (!ok) misses += " " + pn;
  }
  if (ordered < kMinOrderedProtocols) v.fail(fmt("only %d/6 protocols ordered mass > rwp > linear;%s", ordered, misses.c_str()));
  v.detail += (v.pass ? "" : " ") + fmt("%d/6 ordered (loss %% mass>rwp>linear: %s)", ordered, d.c_str());
  return v;
}

Verdict category_ordering(const SweepTable& t) {
  Verdict v;
  std::string d;
  for (MobilityModel m : kModels) {
    const auto mn = name(m);
    std::vector<double> pos, nonpos;
    for (Protocol p : kAllProtocols) {
      const double x = mean(t.pdr_unique.at({name(p), mn}));
      (is_position_based(p) ? pos : nonpos).push_back(x);
    }
    const double a = mean(pos), b = mean(nonpos);
    d += fmt("%s%s position %.4f vs non-position %.4f", d.empty() ? "" : "; ", mn.c_str(), a, b);
    if (!(a > b)) v.fail(fmt("%s: position-based %.4f <= non-position %.4f", mn.c_str(), a, b));
  }
  if (v.pass) v.detail = d;
  return v;
}

// ------------------------------------------------------------------ AC5

Verdict metric_identities(const std::vector<MetricsRecord>& finalized, const SweepTable& t) {
  Verdict v;
  RandomStream g(5, "acceptance-metrics");
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto n = 1 + static_cast<std::uint64_t>(g.uniform(0, 100000));
    const auto m = static_cast<std::uint64_t>(g.uniform(0, static_cast<double>(n) + 1));
    const auto in_flight = static_cast<std::uint64_t>(g.uniform(0, static_cast<double>(n - m) + 1));
    const auto dup = static_cast<std::uint64_t>(g.uniform(0, 3)) == 0 ? static_cast<std::uint64_t>(g.uniform(1, 500)) : 0;
    const auto r = finalize({n, m, dup, n - m - in_flight, in_flight});
    const double eq1 = (static_cast<double>(n) - static_cast<double>(m)) / static_cast<double>(n) * 100.0;
    if (std::abs(*r.loss_pct - eq1) > kIdentityTolerance) {
      v.fail(fmt("loss formula mismatch n=%llu m=%llu", static_cast<unsigned long long>(n), static_cast<unsigned long long>(m)));
      break;
    }
    if (r.sent != r.delivered_unique + r.dropped + r.in_flight_at_end) {
      v.fail("partition broken by finalize");
      break;
    }
    if (dup == 0 && in_flight == 0 && std::abs(*r.loss_pct + 100.0 * *r.pdr_unique - 100.0) > kIdentityTolerance) {
      v.fail(fmt("complement identity fails n=%llu m=%llu", static_cast<unsigned long long>(n),
                 static_cast<unsigned long long>(m)));
      break;
    }
    ++checked;
  }
  std::size_t runs = 0;
  for (const auto& r : finalized) {
    ++runs;
    if (r.sent != r.delivered_unique + r.dropped + r.in_flight_at_end) v.fail("partition broken on a finalized run");
  }
  runs += t.rows - t.failed_rows;
  if (t.partition_violations) v.fail(fmt("%zu sweep rows break the partition", t.partition_violations));
  if (t.failed_rows) v.fail(fmt("%zu sweep rows failed", t.failed_rows));
  if (v.pass) v.detail = fmt("%d fuzzed counter sets, partition held on %zu finalized runs", checked, runs);
  return v;
}

// ------------------------------------------------------------------ AC6

Verdict determinism(const ScenarioConfig& base, const SweepSpec& spec, const std::string& csv_jobs8) {
  Verdict v;
  int singles = 0;
  for (Protocol p : kAllProtocols) {
    for (MobilityModel m : kModels) {
      ScenarioConfig c = base;
      c.protocol.protocol = p;
      c.mobility.model = m;
      c.seed = 1000 + static_cast<std::uint64_t>(p) * 7 + static_cast<std::uint64_t>(m);
      const auto a = run_one(c), b = run_one(c);
      const auto ra = csv_row(c, a.output.metrics, a.config_hash), rb = csv_row(c, b.output.metrics, b.config_hash);
      if (ra != rb) v.fail("run_one differs for " + name(p) + "/" + name(m));
      ++singles;
    }
  }
  const auto serial = run_sweep(base, spec, 1);
  if (serial.csv != csv_jobs8) v.fail("sweep CSV at jobs 1 differs from jobs 8");
  if (v.pass) {
    v.detail = fmt("%d configs run twice identical; %zu-run sweep byte-identical at jobs 1 and 8 (%zu bytes)", singles,
                   spec.run_count(), serial.csv.size());
  }
  return v;
}

// ------------------------------------------------------------------ AC7

Verdict message_audit() {
  Verdict v;
  struct Audit {
    std::size_t control = 0;
    std::uint32_t deca_max_per_node_round = 0;
    std::size_t hello = 0;
    std::size_t demc_excess_rounds = 0;
    std::size_t rounds = 0;
  };
  std::vector<ScenarioConfig> cfgs;
  for (Protocol p : {Protocol::DECA, Protocol::DEMC}) {
    for (MobilityModel m : kModels) {
      for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
        ScenarioConfig c;
        c.protocol.protocol = p;
        c.mobility.model = m;
        c.speed = kSweepSpeed;
        c.seed = seed;
        cfgs.push_back(c);
      }
    }
  }
  const auto audits = parallel_map<Audit>(cfgs.size(), [&](std::size_t i) {
    const auto& c = cfgs[i];
    const auto out = simulate(c);
    Audit a;
    a.control = out.control_log.size();
    std::map<std::pair<std::uint32_t, NodeId>, std::uint32_t> announces;
    std::map<std::uint32_t, std::size_t> clustering_tx;
    std::map<std::uint32_t, std::set<NodeId>> relay_senders;
    for (const auto& msg : out.control_log) {
      if (msg.cls == MessageClass::Hello) ++a.hello;
      if (msg.cls == MessageClass::Announce) {
        a.deca_max_per_node_round = std::max(a.deca_max_per_node_round, ++announces[{msg.round, msg.node}]);
        ++clustering_tx[msg.round];
      }
      if (msg.cls == MessageClass::Relay) {
        ++clustering_tx[msg.round];
        relay_senders[msg.round].insert(msg.node);
      }
    }
    if (c.protocol.protocol == Protocol::DEMC) {
      for (const auto& rec : out.rounds) {
        std::set<NodeId> members;
        for (const auto& cl : rec.clusters) members.insert(cl.members.begin(), cl.members.end());
        std::size_t member_relays = 0;
        for (NodeId r : relay_senders[rec.round]) member_relays += members.count(r);
        ++a.rounds;
        if (clustering_tx[rec.round] > rec.clusters.size() + member_relays) ++a.demc_excess_rounds;
      }
    }
    return a;
  });

  std::map<std::string, std::vector<double>> control;
  std::vector<double> deca_all, demc_all;
  std::uint32_t deca_max = 0;
  std::size_t demc_hello = 0, demc_excess = 0, demc_rounds = 0;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    const bool deca = cfgs[i].protocol.protocol == Protocol::DECA;
    const auto& a = audits[i];
    control[name(cfgs[i].protocol.protocol) + "/" + name(cfgs[i].mobility.model)].push_back(static_cast<double>(a.control));
    (deca ? deca_all : demc_all).push_back(static_cast<double>(a.control));
    if (deca) {
      deca_max = std::max(deca_max, a.deca_max_per_node_round);
    } else {
      demc_hello += a.hello;
      demc_excess += a.demc_excess_rounds;
      demc_rounds += a.rounds;
    }
  }
  if (deca_max > 1) v.fail(fmt("a DECA node sent %u clustering messages in one round", deca_max));
  if (demc_hello) v.fail(fmt("DEMC sent %zu hello messages", demc_hello));
  if (demc_excess) v.fail(fmt("%zu DEMC rounds exceed heads + member relays", demc_excess));
  const double mdeca = mean(deca_all), mdemc = mean(demc_all);
  if (!(mdemc < mdeca)) v.fail(fmt("mean DEMC control %.1f >= DECA %.1f", mdemc, mdeca));
  std::string per_model;
  for (MobilityModel m : kModels) {
    per_model += fmt("%s%s DECA %.0f DEMC %.0f", per_model.empty() ? "" : ", ", name(m).c_str(),
                     mean(control["DECA/" + name(m)]), mean(control["DEMC/" + name(m)]));
  }
  const auto d = fmt("DECA max %u clustering tx per node-round; DEMC %zu rounds audited, 0 over bound, %zu hellos; "
                     "mean control DEMC %.1f < DECA %.1f (%s)",
                     deca_max, demc_rounds, demc_hello, mdemc, mdeca, per_model.c_str());
  if (v.pass) v.detail = d;
  return v;
}

// ------------------------------------------------------------------ AC8

MobilityParams params(MobilityModel m, double vmin, double vmax) {
  MobilityParams p;
  p.model = m;
  p.v_min = vmin;
  p.v_max = vmax;
  return p;
}

Verdict mobility_oracles() {
  using namespace mwsn::reference;
  Verdict v;
  const FieldGeometry field{};
  double worst = 0;
  auto track = [&](Vec2 a, Vec2 b) { worst = std::max({worst, std::abs(a.x - b.x), std::abs(a.y - b.y)}); };
  {
    const auto p = params(MobilityModel::RandomWaypoint, 1, 20);
    RandomStream place(41, "placement");
    const auto pts = init_positions(10, field, place);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      RandomStream lib(41, "mobility:" + std::to_string(i)), ref_rng(41, "mobility:" + std::to_string(i));
      auto s = init_state(pts[i], p, field, lib, 0.0);
      RefRwp ref;
      ref.pos = pts[i];
      ref.new_leg(p, ref_rng);
      for (int k = 0; k < 1000; ++k) {
        s = step(s, p, 1.0, field, lib);
        ref.step(p, 1.0, ref_rng);
        track(s.position, ref.pos);
      }
    }
  }
  {
    auto p = params(MobilityModel::Mass, 5, 15);
    p.speed_sigma = 1.0;
    p.turn_sigma = 0.2;
    RandomStream place(42, "placement");
    const auto pts = init_positions(10, field, place);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      RandomStream lib(42, "mobility:" + std::to_string(i)), ref_rng(42, "mobility:" + std::to_string(i));
      auto s = init_state(pts[i], p, field, lib, 0.0);
      RefMass ref;
      ref.pos = pts[i];
      ref.heading = ref_rng.uniform(0.0, 2 * std::numbers::pi);
      ref.speed = ref_rng.uniform(p.v_min, p.v_max);
      for (int k = 0; k < 1000; ++k) {
        s = step(s, p, 1.0, field, lib);
        ref.step(p, 1.0, ref_rng);
        track(s.position, ref.pos);
      }
    }
  }
  double worst_speed = 0;
  {
    auto p = params(MobilityModel::Linear, 12, 12);
    p.shared_heading = false;
    RandomStream place(43, "placement");
    const auto pts = init_positions(10, field, place);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      RandomStream lib(43, "mobility:" + std::to_string(i)), ref_rng(43, "mobility:" + std::to_string(i));
      auto s = init_state(pts[i], p, field, lib, 0.0);
      const double heading = ref_rng.uniform(0.0, 2 * std::numbers::pi);
      const double vx = 12 * std::cos(heading), vy = 12 * std::sin(heading);
      for (int k = 1; k <= 1000; ++k) {
        s = step(s, p, 1.0, field, lib);
        double sx, sy;
        track(s.position, {tri_fold(pts[i].x + vx * k, field.width, sx), tri_fold(pts[i].y + vy * k, field.height, sy)});
      }
      const double v0 = norm(s.velocity);
      for (int k = 0; k < 10000; ++k) {
        s = step(s, p, 1.0, field, lib);
        worst_speed = std::max(worst_speed, std::abs(norm(s.velocity) - v0) / v0);
      }
    }
  }
  if (worst > kOracleTolerance) v.fail(fmt("max deviation from reference %.3e m", worst));
  if (worst_speed > kSpeedConservation) v.fail(fmt("linear speed drift %.3e relative", worst_speed));

  RandomStream g(44, "acceptance-fuzz");
  std::size_t outside = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto model = kModels[i % 3];
    const double vmax = g.uniform(0.1, 30.0);
    auto p = params(model, g.uniform(0.0, vmax), vmax);
    p.speed_sigma = g.uniform(0.0, 3.0);
    p.turn_sigma = g.uniform(0.0, 1.0);
    RandomStream r(static_cast<std::uint64_t>(i), "mobility:0");
    auto s = init_state({g.uniform(0.0, 1000.0), g.uniform(0.0, 1000.0)}, p, field, r, g.uniform(0.0, 6.28));
    s = step(s, p, 1.0, field, r);
    outside += !field.contains(s.position);
  }
  if (outside) v.fail(fmt("%zu of 1e5 fuzzed steps left the field", outside));
  if (v.pass) {
    v.detail = fmt("3 models x 10 nodes x 1000 steps, max deviation %.2e m; linear speed drift %.2e; 1e5 fuzz in field",
                   worst, worst_speed);
  }
  return v;
}

// ------------------------------------------------------------------ AC9

Verdict kernel_fuzz() {
  Verdict v;
  Kernel k;
  RandomStream rng(77, "acceptance-kernel");
  std::vector<std::pair<SimTime, std::uint64_t>> log;
  k.set_trace([&](const SimEvent& e) { log.emplace_back(e.fire_at, e.seq); });
  const int n = 100000;
  std::vector<EventHandle> handles;
  std::vector<char> ran(n, 0), cancelled(n, 0);
  for (int i = 0; i < n; ++i) {
    const double at = std::floor(rng.uniform(0.0, 2000.0)) / 8.0;
    handles.push_back(k.schedule(at, EventKind::TrafficGeneration, static_cast<NodeId>(i), [&ran, i] { ran[i] = 1; }));
  }
  std::size_t n_cancelled = 0;
  for (int i = 0; i < n / 5; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform(0.0, n));
    if (!cancelled[j] && k.cancel(handles[j])) {
      cancelled[j] = 1;
      ++n_cancelled;
    }
  }
  k.run(1e9);
  std::size_t disorder = 0, ghost = 0, missing = 0;
  for (std::size_t i = 1; i < log.size(); ++i) disorder += !(log[i - 1] < log[i]);
  for (int i = 0; i < n; ++i) {
    ghost += cancelled[i] && ran[i];
    missing += !cancelled[i] && !ran[i];
  }
  if (disorder) v.fail(fmt("%zu out-of-order dispatches", disorder));
  if (ghost) v.fail(fmt("%zu cancelled events dispatched", ghost));
  if (missing) v.fail(fmt("%zu live events never dispatched", missing));
  if (v.pass) v.detail = fmt("%d events, %zu cancelled, %zu dispatched in (fire_at, seq) order", n, n_cancelled, log.size());
  return v;
}

}  // namespace

int main() {
  try {
    std::vector<MetricsRecord> finalized;
    report("AC1", "static sanity", static_sanity(finalized));

    const ScenarioConfig base;
    const SweepSpec spec = speed10_spec();
    const auto sweep = run_sweep(base, spec, 8);
    const auto table = tabulate(sweep.csv);
    for (const auto& f : sweep.failures) std::printf("  failed cell: %s\n", f.c_str());

    report("AC2", "recovery benefit", recovery_benefit(table));
    report("AC3", "mobility-model loss ordering", loss_ordering(table));
    report("AC4", "category ordering", category_ordering(table));
    report("AC5", "metric identities", metric_identities(finalized, table));
    report("AC6", "determinism", determinism(base, spec, sweep.csv));
    report("AC7", "message-count audit", message_audit());
    report("AC8", "mobility oracle equivalence", mobility_oracles());
    report("AC9", "kernel ordering fuzz", kernel_fuzz());
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  return g_failed == 0 ? 0 : 1;
}
