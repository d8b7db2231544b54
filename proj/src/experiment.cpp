#include "mwsn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "mwsn/error.hpp"

namespace mwsn {

namespace {

// ----------------------------------------------------------- value parsing

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct BadValue {
  std::string reason;
};

double to_double(std::string_view v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end || !std::isfinite(out)) throw BadValue{"not a number"};
  return out;
}

std::uint64_t to_u64(std::string_view v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw BadValue{"not a non-negative integer"};
  return out;
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw BadValue{"not a boolean"};
}

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ------------------------------------------------------------ key registry

struct Key {
  const char* name;
  std::function<void(ScenarioConfig&, std::string_view)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};


template <typename Access>
Key real_key(const char* name, Access access, double lo, bool lo_open, double hi = INFINITY) {
  return Key{name,
             [=](ScenarioConfig& c, std::string_view v) {
               const double x = to_double(v);
               if (lo_open ? !(x > lo) : !(x >= lo)) {
                 throw BadValue{std::string("must be ") + (lo_open ? "> " : ">= ") + fmt_double(lo)};
               }
               if (!(x <= hi)) throw BadValue{"must be <= " + fmt_double(hi)};
               access(c) = x;
             },
             [=](const ScenarioConfig& c) {
               ScenarioConfig copy = c;
               return fmt_double(access(copy));
             }};
}

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back({"protocol",
                 [](ScenarioConfig& c, std::string_view v) {
                   auto p = parse_protocol(v);
                   if (!p) throw BadValue{"expected one of MAR, GRC, GRC-R, DECA, DEMC, DEMC-R"};
                   c.protocol.protocol = *p;
                 },
                 [](const ScenarioConfig& c) { return std::string(to_string(c.protocol.protocol)); }});
    k.push_back({"mobility",
                 [](ScenarioConfig& c, std::string_view v) {
                   auto m = parse_mobility_model(v);
                   if (!m) throw BadValue{"expected one of rwp, mass, linear"};
                   c.mobility.model = *m;
                 },
                 [](const ScenarioConfig& c) { return std::string(to_string(c.mobility.model)); }});
    k.push_back({"nodes",
                 [](ScenarioConfig& c, std::string_view v) {
                   const auto n = to_u64(v);
                   if (n < 1 || n > 100000) throw BadValue{"must be in [1, 100000]"};
                   c.node_count = n;
                 },
                 [](const ScenarioConfig& c) { return std::to_string(c.node_count); }});
    k.push_back(real_key("field_width", [](ScenarioConfig& c) -> double& { return c.field.width; }, 0.0, true));
    k.push_back(real_key("field_height", [](ScenarioConfig& c) -> double& { return c.field.height; }, 0.0, true));
    k.push_back(real_key("speed", [](ScenarioConfig& c) -> double& { return c.speed; }, 0.0, false));
    k.push_back({"seed", [](ScenarioConfig& c, std::string_view v) { c.seed = to_u64(v); },
                 [](const ScenarioConfig& c) { return std::to_string(c.seed); }});
    k.push_back(real_key("duration", [](ScenarioConfig& c) -> double& { return c.duration; }, 0.0, true));
    k.push_back(real_key("sample_interval", [](ScenarioConfig& c) -> double& { return c.mobility.sample_interval; },
                         0.0, true));
    k.push_back(real_key("pause", [](ScenarioConfig& c) -> double& { return c.mobility.pause; }, 0.0, false));
    k.push_back(real_key("speed_sigma", [](ScenarioConfig& c) -> double& { return c.mobility.speed_sigma; }, 0.0, false));
    k.push_back(real_key("turn_sigma", [](ScenarioConfig& c) -> double& { return c.mobility.turn_sigma; }, 0.0, false));
    k.push_back({"linear_shared_heading",
                 [](ScenarioConfig& c, std::string_view v) { c.mobility.shared_heading = to_bool(v); },
                 [](const ScenarioConfig& c) { return std::string(c.mobility.shared_heading ? "true" : "false"); }});
    k.push_back(real_key("range", [](ScenarioConfig& c) -> double& { return c.radio.range; }, 0.0, true));
    k.push_back(real_key("tx_delay", [](ScenarioConfig& c) -> double& { return c.radio.tx_delay; }, 0.0, false));
    k.push_back(real_key("round_length", [](ScenarioConfig& c) -> double& { return c.protocol.round_length; }, 0.0, true));
    k.push_back({"recovery_retries",
                 [](ScenarioConfig& c, std::string_view v) {
                   const auto n = to_u64(v);
                   if (n > 1000) throw BadValue{"must be <= 1000"};
                   c.protocol.recovery_retries = static_cast<std::uint32_t>(n);
                 },
                 [](const ScenarioConfig& c) { return std::to_string(c.protocol.recovery_retries); }});
    k.push_back(real_key("recovery_timeout", [](ScenarioConfig& c) -> double& { return c.protocol.recovery_timeout; },
                         0.0, true));
    k.push_back(real_key("deca_w_energy", [](ScenarioConfig& c) -> double& { return c.protocol.deca.energy; }, 0.0,
                         false, 1.0));
    k.push_back(real_key("deca_w_degree", [](ScenarioConfig& c) -> double& { return c.protocol.deca.degree; }, 0.0,
                         false, 1.0));
    k.push_back(real_key("deca_w_mobility", [](ScenarioConfig& c) -> double& { return c.protocol.deca.mobility; },
                         0.0, false, 1.0));
    k.push_back(real_key("grid_cell", [](ScenarioConfig& c) -> double& { return c.protocol.grid_cell; }, 0.0, true));
    k.push_back(real_key("grc_w_center", [](ScenarioConfig& c) -> double& { return c.protocol.grc_w_center; }, 0.0, false));
    k.push_back(real_key("grc_w_energy", [](ScenarioConfig& c) -> double& { return c.protocol.grc_w_energy; }, 0.0, false));
    k.push_back(real_key("announce_window", [](ScenarioConfig& c) -> double& { return c.protocol.announce_window; },
                         0.0, true));
    k.push_back(real_key("mobility_window", [](ScenarioConfig& c) -> double& { return c.protocol.mobility_window; },
                         0.0, true));
    k.push_back(real_key("initial_energy", [](ScenarioConfig& c) -> double& { return c.protocol.initial_energy; },
                         0.0, true));
    k.push_back(real_key("tx_energy", [](ScenarioConfig& c) -> double& { return c.protocol.tx_energy; }, 0.0, false));
    k.push_back(real_key("rx_energy", [](ScenarioConfig& c) -> double& { return c.protocol.rx_energy; }, 0.0, false));
    k.push_back(real_key("traffic_interval", [](ScenarioConfig& c) -> double& { return c.traffic_interval; }, 0.0, true));
    k.push_back(real_key("warmdown", [](ScenarioConfig& c) -> double& { return c.warmdown; }, 0.0, false));
    k.push_back({"sink_x",
                 [](ScenarioConfig& c, std::string_view v) {
                   const double x = to_double(v);
                   if (x < 0.0) throw BadValue{"must be >= 0"};
                   Vec2 s = c.sink_position();
                   s.x = x;
                   c.sink = s;
                 },
                 [](const ScenarioConfig& c) { return fmt_double(c.sink_position().x); }});
    k.push_back({"sink_y",
                 [](ScenarioConfig& c, std::string_view v) {
                   const double y = to_double(v);
                   if (y < 0.0) throw BadValue{"must be >= 0"};
                   Vec2 s = c.sink_position();
                   s.y = y;
                   c.sink = s;
                 },
                 [](const ScenarioConfig& c) { return fmt_double(c.sink_position().y); }});
    return k;
  }();
  return keys;
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view v, Parse parse) {
  std::vector<T> out;
  for (auto item : split(v, ',')) {
    item = trim(item);
    if (item.empty()) throw BadValue{"empty list element"};
    out.push_back(parse(item));
  }
  if (out.empty()) throw BadValue{"list must not be empty"};
  return out;
}

struct SweepDraft {
  SweepSpec spec = default_sweep();
  std::optional<std::vector<std::uint64_t>> seeds;
  std::uint64_t base_seed = 1;
  std::uint64_t replications = 20;
};

bool apply_sweep_key(SweepDraft& d, std::string_view key, std::string_view v) {
  if (key == "sweep.protocols") {
    d.spec.protocols = parse_list<Protocol>(v, [](std::string_view s) {
      auto p = parse_protocol(s);
      if (!p) throw BadValue{"unknown protocol '" + std::string(s) + "'"};
      return *p;
    });
  } else if (key == "sweep.mobility") {
    d.spec.models = parse_list<MobilityModel>(v, [](std::string_view s) {
      auto m = parse_mobility_model(s);
      if (!m) throw BadValue{"unknown mobility model '" + std::string(s) + "'"};
      return *m;
    });
  } else if (key == "sweep.speeds") {
    d.spec.speeds = parse_list<double>(v, [](std::string_view s) {
      const double x = to_double(s);
      if (x < 0.0) throw BadValue{"speeds must be >= 0"};
      return x;
    });
  } else if (key == "sweep.seeds") {
    d.seeds = parse_list<std::uint64_t>(v, to_u64);
  } else if (key == "sweep.base_seed") {
    d.base_seed = to_u64(v);
  } else if (key == "sweep.replications") {
    d.replications = to_u64(v);
    if (d.replications < 1) throw BadValue{"must be >= 1"};
  } else {
    return false;
  }
  return true;
}

void apply_key(ScenarioConfig& cfg, SweepDraft& sweep, std::string_view key, std::string_view value,
               const std::string& where) {
  try {
    if (apply_sweep_key(sweep, key, value)) return;
    for (const auto& k : registry()) {
      if (key == k.name) {
        k.set(cfg, value);
        return;
      }
    }
  } catch (const BadValue& bad) {
    throw Error(ErrorCode::Config, where + ": invalid value '" + std::string(value) + "' for key '" +
                                       std::string(key) + "': " + bad.reason);
  }
  throw Error(ErrorCode::Config, where + ": unknown key '" + std::string(key) + "'");
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

SweepSpec default_sweep() {
  SweepSpec s;
  s.protocols.assign(std::begin(kAllProtocols), std::end(kAllProtocols));
  s.models = {MobilityModel::RandomWaypoint, MobilityModel::Mass, MobilityModel::Linear};
  s.speeds = {1.0, 5.0, 10.0, 15.0, 20.0};
  for (std::uint64_t i = 0; i < 20; ++i) s.seeds.push_back(1 + i);
  return s;
}

ParsedConfig parse_config(std::string_view text, const Overrides& overrides) {
  ParsedConfig out;
  SweepDraft sweep;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no);
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::Config, where + ": malformed line, expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error(ErrorCode::Config, where + ": malformed line, expected 'key = value'");
    }
    apply_key(out.scenario, sweep, key, value, where);
  }
  for (const auto& [key, value] : overrides) {
    apply_key(out.scenario, sweep, trim(key), trim(value), "override '" + key + "'");
  }
  if (sweep.seeds) {
    sweep.spec.seeds = *sweep.seeds;
  } else {
    sweep.spec.seeds.clear();
    for (std::uint64_t i = 0; i < sweep.replications; ++i) sweep.spec.seeds.push_back(sweep.base_seed + i);
  }
  out.sweep = std::move(sweep.spec);
  validate(out.scenario);
  return out;
}

ParsedConfig load_config(const std::filesystem::path& file, const Overrides& overrides) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::vector<std::string> scenario_keys() {
  std::vector<std::string> out;
  for (const auto& k : registry()) out.emplace_back(k.name);
  return out;
}

std::string echo(const ScenarioConfig& cfg) {
  std::string out;
  for (const auto& k : registry()) {
    out += k.name;
    out += " = ";
    out += k.get(cfg);
    out += '\n';
  }
  return out;
}

std::string config_hash(const ScenarioConfig& cfg) { return hex16(fnv1a64(echo(cfg))); }

RunResult run_one(const ScenarioConfig& cfg, TraceOptions trace) {
  RunResult r;
  r.config = cfg;
  r.config_echo = echo(cfg);
  r.config_hash = hex16(fnv1a64(r.config_echo));
  r.output = simulate(cfg, trace);
  return r;
}

std::string csv_header() {
  return "protocol,mobility,speed_mps,seed,nodes,sent,delivered_unique,duplicates,dropped,in_flight,loss_pct,"
         "pdr_as_defined,pdr_unique,config_hash";
}

std::string csv_row(const ScenarioConfig& cfg, const MetricsRecord& m, const std::string& hash) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt_fixed(*v) : std::string(); };
  std::string row;
  row += std::string(to_string(cfg.protocol.protocol)) + ',' + std::string(to_string(cfg.mobility.model)) + ',' +
         fmt_fixed(cfg.speed) + ',' + std::to_string(cfg.seed) + ',' + std::to_string(cfg.node_count) + ',' +
         std::to_string(m.sent) + ',' + std::to_string(m.delivered_unique) + ',' + std::to_string(m.duplicates) + ',' +
         std::to_string(m.dropped) + ',' + std::to_string(m.in_flight_at_end) + ',' + opt(m.loss_pct) + ',' +
         opt(m.pdr_as_defined) + ',' + opt(m.pdr_unique) + ',' + hash;
  return row;
}

SweepResult run_sweep(const ScenarioConfig& base, const SweepSpec& spec, unsigned jobs) {
  if (spec.run_count() == 0) throw Error(ErrorCode::Config, "sweep has an empty axis");
  struct Cell {
    ScenarioConfig cfg;
    std::string hash;
    std::optional<MetricsRecord> metrics;
    std::string error;
  };
  std::vector<Cell> cells;
  cells.reserve(spec.run_count());
  for (Protocol p : spec.protocols) {
    for (MobilityModel m : spec.models) {
      for (double v : spec.speeds) {
        for (std::uint64_t seed : spec.seeds) {
          Cell c;
          c.cfg = base;
          c.cfg.protocol.protocol = p;
          c.cfg.mobility.model = m;
          c.cfg.speed = v;
          c.cfg.seed = seed;
          c.hash = config_hash(c.cfg);
          cells.push_back(std::move(c));
        }
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      auto& c = cells[i];
      try {
        c.metrics = simulate(c.cfg).metrics;
      } catch (const std::exception& e) {
        c.error = e.what();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  SweepResult out;
  std::string& csv = out.csv;
  csv = csv_header() + '\n';
  const std::size_t per_cell = spec.seeds.size();
  for (std::size_t start = 0; start < cells.size(); start += per_cell) {
    std::vector<MetricsRecord> ok;
    std::string joined_hashes;
    for (std::size_t i = start; i < start + per_cell; ++i) {
      const auto& c = cells[i];
      joined_hashes += c.hash;
      if (c.metrics) {
        csv += csv_row(c.cfg, *c.metrics, c.hash) + '\n';
        ok.push_back(*c.metrics);
      } else {
        csv += std::string(to_string(c.cfg.protocol.protocol)) + ',' + std::string(to_string(c.cfg.mobility.model)) +
               ',' + fmt_fixed(c.cfg.speed) + ',' + std::to_string(c.cfg.seed) + ',' + std::to_string(c.cfg.node_count) +
               ",,,,,,,,," + c.hash + '\n';
        out.failures.push_back(std::string(to_string(c.cfg.protocol.protocol)) + '/' +
                               std::string(to_string(c.cfg.mobility.model)) + '/' + fmt_fixed(c.cfg.speed) +
                               "/seed " + std::to_string(c.cfg.seed) + ": " + c.error);
      }
    }
    const auto& head = cells[start].cfg;
    std::string row = std::string(to_string(head.protocol.protocol)) + ',' +
                      std::string(to_string(head.mobility.model)) + ',' + fmt_fixed(head.speed) + ",mean," +
                      std::to_string(head.node_count) + ',';
    if (ok.empty()) {
      row += ",,,,,,,";
    } else {
      double sent = 0, uniq = 0, dup = 0, dropped = 0, inflight = 0;
      for (const auto& m : ok) {
        sent += static_cast<double>(m.sent);
        uniq += static_cast<double>(m.delivered_unique);
        dup += static_cast<double>(m.duplicates);
        dropped += static_cast<double>(m.dropped);
        inflight += static_cast<double>(m.in_flight_at_end);
      }
      const double k = static_cast<double>(ok.size());
      row += fmt_fixed(sent / k) + ',' + fmt_fixed(uniq / k) + ',' + fmt_fixed(dup / k) + ',' + fmt_fixed(dropped / k) +
             ',' + fmt_fixed(inflight / k) + ',';
      bool any_metrics = std::any_of(ok.begin(), ok.end(), [](const MetricsRecord& m) { return m.loss_pct.has_value(); });
      if (any_metrics) {
        const Aggregate a = aggregate(ok);
        row += fmt_fixed(a.loss_pct.mean) + ',' + fmt_fixed(a.pdr_as_defined.mean) + ',' + fmt_fixed(a.pdr_unique.mean);
      } else {
        row += ",,";
      }
    }
    row += ',' + hex16(fnv1a64(joined_hashes));
    csv += row + '\n';
  }
  return out;
}

PlotTable emit_plotdata(std::string_view csv, PlotMetric metric, MobilityModel model) {
  const std::string model_name(to_string(model));
  const std::size_t col = metric == PlotMetric::Loss ? 10 : 11;
  std::vector<std::string> protocols;
  std::map<std::pair<std::string, double>, std::vector<double>> samples;
  std::vector<double> speeds;
  bool header = true;
  for (auto line : split(csv, '\n')) {
    line = trim(line);
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.starts_with("protocol,")) continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 14) throw Error(ErrorCode::InvalidArgument, "malformed sweep CSV row: " + std::string(line));
    if (f[1] != model_name || f[3] == "mean") continue;
    const std::string proto(f[0]);
    double speed = 0.0;
    try {
      speed = to_double(f[2]);
    } catch (const BadValue&) {
      throw Error(ErrorCode::InvalidArgument, "malformed speed in sweep CSV row: " + std::string(line));
    }
    if (std::find(protocols.begin(), protocols.end(), proto) == protocols.end()) protocols.push_back(proto);
    if (std::find(speeds.begin(), speeds.end(), speed) == speeds.end()) speeds.push_back(speed);
    auto& bucket = samples[{proto, speed}];
    if (!f[col].empty()) bucket.push_back(to_double(f[col]));
  }
  std::sort(speeds.begin(), speeds.end());
  std::sort(protocols.begin(), protocols.end(), [](const std::string& a, const std::string& b) {
    auto rank = [](const std::string& s) {
      auto p = parse_protocol(s);
      return p ? static_cast<int>(*p) : 100;
    };
    return rank(a) != rank(b) ? rank(a) < rank(b) : a < b;
  });

  bool with_ci = false;
  for (const auto& [k, v] : samples) with_ci = with_ci || v.size() > 1;

  PlotTable out;
  out.text = "speed_mps";
  for (const auto& p : protocols) {
    out.text += ',' + p + "_mean";
    if (with_ci) out.text += ',' + p + "_ci_low," + p + "_ci_high";
  }
  out.text += '\n';
  for (double s : speeds) {
    out.text += fmt_fixed(s);
    for (const auto& p : protocols) {
      auto it = samples.find({p, s});
      if (it == samples.end() || it->second.empty()) {
        out.missing.push_back(p + " @ " + fmt_fixed(s) + " m/s");
        out.text += with_ci ? ",,," : ",";
        continue;
      }
      const Summary sum = summarize(it->second);
      out.text += ',' + fmt_fixed(sum.mean);
      if (with_ci) {
        out.text += ',' + (sum.ci_low ? fmt_fixed(*sum.ci_low) : std::string()) + ',' +
                    (sum.ci_high ? fmt_fixed(*sum.ci_high) : std::string());
      }
    }
    out.text += '\n';
  }
  return out;
}

}  // namespace mwsn
