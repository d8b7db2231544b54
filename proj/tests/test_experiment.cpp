#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "mwsn/error.hpp"
#include "mwsn/experiment.hpp"
#include "mwsn/random.hpp"

using namespace mwsn;

namespace {

std::string config_error(std::string_view text, const Overrides& o = {}) {
  try {
    parse_config(text, o);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& row) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : row) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

ScenarioConfig short_run(Protocol p, MobilityModel m, double speed, std::uint64_t seed) {
  ScenarioConfig c;
  c.protocol.protocol = p;
  c.mobility.model = m;
  c.speed = speed;
  c.seed = seed;
  c.node_count = 40;
  c.duration = 120;
  return c;
}

}  // namespace

TEST_CASE("empty config gives defaults") {
  const auto p = parse_config("");
  const auto& c = p.scenario;
  CHECK(c.node_count == 100);
  CHECK(c.field.width == 1000);
  CHECK(c.field.height == 1000);
  CHECK(c.duration == 900);
  CHECK(c.radio.range == 130);
  CHECK(c.radio.tx_delay == 0.005);
  CHECK(c.protocol.round_length == 20);
  CHECK(c.protocol.recovery_retries == 3);
  CHECK(c.protocol.recovery_timeout == 2);
  CHECK(c.traffic_interval == 10);
  CHECK(c.warmdown == 30);
  CHECK(p.sweep.run_count() == 1800);
  CHECK(p.sweep.cell_count() == 90);
  CHECK(p.sweep.speeds == std::vector<double>{1, 5, 10, 15, 20});
  CHECK(echo(c) == echo(ScenarioConfig{}));
}

TEST_CASE("config syntax and validation errors") {
  auto msg = config_error("speed = -3\n");
  CHECK(msg.find("speed") != std::string::npos);
  CHECK(msg.find("line 1") != std::string::npos);

  msg = config_error("# header\n\nnodes = 10\nbogus = 1\n");
  CHECK(msg.find("line 4") != std::string::npos);
  CHECK(msg.find("unknown key 'bogus'") != std::string::npos);

  msg = config_error("nodes 10\n");
  CHECK(msg.find("malformed") != std::string::npos);
  CHECK(config_error("range =\n").find("line 1") != std::string::npos);
  CHECK(config_error("protocol = LEACH\n").find("protocol") != std::string::npos);
  CHECK(config_error("mobility = brownian\n").find("mobility") != std::string::npos);
  CHECK(config_error("range = 0\n").find("range") != std::string::npos);
  CHECK(config_error("seed = 1.5\n").find("seed") != std::string::npos);
  CHECK(config_error("speed = nan\n").find("speed") != std::string::npos);
  CHECK(config_error("sweep.speeds = 1,,2\n").find("sweep.speeds") != std::string::npos);
  CHECK(config_error("sweep.replications = 0\n").find("sweep.replications") != std::string::npos);
  CHECK(config_error("", {{"speed", "-1"}}).find("override 'speed'") != std::string::npos);

  try {
    load_config("/nonexistent/dir/x.cfg");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}

TEST_CASE("overrides win over file values") {
  const auto p = parse_config("speed = 5 # slow\nprotocol = DEMC\n", {{"speed", "10"}, {"protocol", "GRC-R"}});
  CHECK(p.scenario.speed == 10);
  CHECK(p.scenario.protocol.protocol == Protocol::GRC_R);
  const auto q = parse_config("speed = 5\n", {{"speed", "7"}, {"speed", "9"}});
  CHECK(q.scenario.speed == 9);
}

TEST_CASE("sweep axes") {
  auto p = parse_config("sweep.protocols = GRC, DEMC-R\nsweep.mobility = mass\nsweep.speeds = 0, 2.5\n"
                        "sweep.base_seed = 7\nsweep.replications = 3\n");
  CHECK(p.sweep.protocols == std::vector<Protocol>{Protocol::GRC, Protocol::DEMC_R});
  CHECK(p.sweep.models == std::vector<MobilityModel>{MobilityModel::Mass});
  CHECK(p.sweep.speeds == std::vector<double>{0, 2.5});
  CHECK(p.sweep.seeds == std::vector<std::uint64_t>{7, 8, 9});
  CHECK(p.sweep.run_count() == 12);
  p = parse_config("sweep.seeds = 4, 2\nsweep.replications = 9\n");
  CHECK(p.sweep.seeds == std::vector<std::uint64_t>{4, 2});
}

TEST_CASE("echo reproduces the config") {
  RandomStream g(11, "echo");
  for (int i = 0; i < 200; ++i) {
    ScenarioConfig c;
    c.protocol.protocol = kAllProtocols[static_cast<int>(g.uniform(0, 6))];
    c.mobility.model = static_cast<MobilityModel>(static_cast<int>(g.uniform(0, 3)));
    c.speed = g.uniform(0, 30);
    c.seed = static_cast<std::uint64_t>(g.uniform(0, 1e15));
    c.node_count = 1 + static_cast<std::size_t>(g.uniform(0, 500));
    c.radio.range = g.uniform(1, 500);
    c.radio.tx_delay = g.uniform(0, 0.1);
    c.protocol.round_length = g.uniform(1, 300);
    c.protocol.deca.energy = g.uniform(0, 1);
    c.protocol.deca.degree = 1.0 - c.protocol.deca.energy;
    c.protocol.deca.mobility = 0.0;
    c.mobility.turn_sigma = g.uniform(0, 1);
    c.mobility.shared_heading = g.uniform(0, 1) < 0.5;
    if (g.uniform(0, 1) < 0.5) c.sink = Vec2{g.uniform(0, 1000), g.uniform(0, 1000)};
    const auto text = echo(c);
    const auto back = parse_config(text).scenario;
    REQUIRE(echo(back) == text);
    REQUIRE(back.speed == c.speed);
    REQUIRE(back.radio.range == c.radio.range);
    REQUIRE(back.seed == c.seed);
    REQUIRE(back.protocol.protocol == c.protocol.protocol);
    REQUIRE(back.mobility.shared_heading == c.mobility.shared_heading);
    REQUIRE(back.sink_position() == c.sink_position());
    REQUIRE(config_hash(back) == config_hash(c));
  }
  CHECK(lines(echo(ScenarioConfig{})).size() == scenario_keys().size());
}

TEST_CASE("config hash") {
  ScenarioConfig a, b;
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(echo(a))));
  CHECK(config_hash(a) == buf);
}

TEST_CASE("run_one is deterministic") {
  for (Protocol p : kAllProtocols) {
    const auto c = short_run(p, MobilityModel::Mass, 10, 3);
    const auto a = run_one(c);
    const auto b = run_one(c);
    CHECK(a.output.metrics == b.output.metrics);
    CHECK(csv_row(c, a.output.metrics, a.config_hash) == csv_row(c, b.output.metrics, b.config_hash));
    CHECK(a.config_echo == echo(c));
  }
}

TEST_CASE("static dense network is lossless") {
  for (Protocol p : kAllProtocols) {
    auto c = short_run(p, MobilityModel::RandomWaypoint, 0, 5);
    c.radio.range = 400;
    const auto r = run_one(c);
    REQUIRE(r.output.metrics.pdr_unique);
    CHECK(*r.output.metrics.pdr_unique == 1.0);
    CHECK(*r.output.metrics.loss_pct == 0.0);
  }
}

TEST_CASE("regression fixture: GRC-R, mass, 10 m/s, seed 1") {
  const auto c = parse_config("protocol = GRC-R\nmobility = mass\nspeed = 10\nseed = 1\n").scenario;
  const auto r = run_one(c);
  const auto& m = r.output.metrics;
  CHECK(m.sent == 7310);
  CHECK(m.delivered_unique == 2014);
  CHECK(m.duplicates == 0);
  CHECK(m.dropped == 5296);
  CHECK(m.in_flight_at_end == 0);
  CHECK(*m.loss_pct == doctest::Approx(72.448700410396711).epsilon(1e-12));
  CHECK(r.config_hash == "7fe9a1a41958df87");
}

TEST_CASE("csv rows") {
  CHECK(csv_header() ==
        "protocol,mobility,speed_mps,seed,nodes,sent,delivered_unique,duplicates,dropped,in_flight,loss_pct,"
        "pdr_as_defined,pdr_unique,config_hash");
  ScenarioConfig c;
  c.protocol.protocol = Protocol::DEMC_R;
  c.mobility.model = MobilityModel::Linear;
  c.speed = 2.5;
  c.seed = 4;
  CHECK(csv_row(c, finalize({8, 6, 1, 2, 0}), "00000000000000ff") ==
        "DEMC-R,linear,2.500000,4,100,8,6,1,2,0,25.000000,0.875000,0.750000,00000000000000ff");
  CHECK(csv_row(c, finalize({}), "h") == "DEMC-R,linear,2.500000,4,100,0,0,0,0,0,,,,h");
}

TEST_CASE("sweep layout and consistency") {
  auto base = short_run(Protocol::MAR, MobilityModel::RandomWaypoint, 0, 0);
  SweepSpec spec;
  spec.protocols = {Protocol::GRC, Protocol::DEMC_R};
  spec.models = {MobilityModel::Mass, MobilityModel::Linear};
  spec.speeds = {5, 10};
  spec.seeds = {1, 2, 3};
  const auto one = run_sweep(base, spec, 1);
  const auto many = run_sweep(base, spec, 8);
  CHECK(one.csv == many.csv);
  CHECK(one.failures.empty());

  const auto rows = lines(one.csv);
  REQUIRE(rows.size() == 1 + spec.run_count() + spec.cell_count());
  CHECK(rows[0] == csv_header());
  std::size_t r = 1;
  for (Protocol p : spec.protocols) {
    for (MobilityModel m : spec.models) {
      for (double v : spec.speeds) {
        std::vector<double> pdrs;
        for (std::uint64_t seed : spec.seeds) {
          auto c = base;
          c.protocol.protocol = p;
          c.mobility.model = m;
          c.speed = v;
          c.seed = seed;
          const auto single = run_one(c);
          REQUIRE(rows[r] == csv_row(c, single.output.metrics, single.config_hash));
          pdrs.push_back(std::stod(fields(rows[r])[12]));
          ++r;
        }
        const auto agg = fields(rows[r++]);
        REQUIRE(agg.size() == 14);
        CHECK(agg[0] == to_string(p));
        CHECK(agg[3] == "mean");
        double mean = 0;
        for (double x : pdrs) mean += x / static_cast<double>(pdrs.size());
        CHECK(std::stod(agg[12]) == doctest::Approx(mean).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("single-cell sweep equals run_one") {
  const auto c = short_run(Protocol::DECA, MobilityModel::RandomWaypoint, 10, 9);
  SweepSpec spec{{Protocol::DECA}, {MobilityModel::RandomWaypoint}, {10}, {9}};
  const auto rows = lines(run_sweep(c, spec, 4).csv);
  REQUIRE(rows.size() == 3);
  const auto r = run_one(c);
  CHECK(rows[1] == csv_row(c, r.output.metrics, r.config_hash));
  const auto agg = fields(rows[2]);
  const auto run = fields(rows[1]);
  for (std::size_t i : {10u, 11u, 12u}) CHECK(agg[i] == run[i]);
}

TEST_CASE("empty sweep axis is rejected") {
  SweepSpec spec{{Protocol::DECA}, {}, {10}, {1}};
  CHECK_THROWS_AS(run_sweep(ScenarioConfig{}, spec, 1), Error);
}

TEST_CASE("failed cells become failed rows") {
  auto base = short_run(Protocol::GRC, MobilityModel::Linear, 0, 1);
  base.mobility.sample_interval = 100;  // step overshoots the field at 20 m/s
  SweepSpec spec{{Protocol::GRC}, {MobilityModel::Linear}, {1, 20}, {1, 2}};
  const auto res = run_sweep(base, spec, 2);
  const auto rows = lines(res.csv);
  REQUIRE(rows.size() == 1 + 4 + 2);
  CHECK(fields(rows[1])[5] != "");
  CHECK(fields(rows[4])[5] == "");
  CHECK(fields(rows[4]).size() == 14);
  CHECK(fields(rows[6])[10] == "");
  CHECK(res.failures.size() == 2);
}

TEST_CASE("plot data") {
  const std::string csv =
      csv_header() +
      "\n"
      "MAR,mass,5.000000,1,10,10,8,0,2,0,20.000000,0.800000,0.800000,a\n"
      "MAR,mass,5.000000,2,10,10,6,0,4,0,40.000000,0.600000,0.600000,b\n"
      "MAR,mass,5.000000,mean,10,10,7,0,3,0,30.000000,0.700000,0.700000,c\n"
      "MAR,mass,1.000000,1,10,10,10,0,0,0,0.000000,1.000000,1.000000,d\n"
      "DEMC,mass,5.000000,1,10,10,5,0,5,0,50.000000,0.500000,0.500000,e\n"
      "GRC,mass,5.000000,1,10,10,9,0,1,0,10.000000,0.900000,0.900000,f\n"
      "GRC,rwp,5.000000,1,10,10,1,0,9,0,90.000000,0.100000,0.100000,g\n";
  auto t = emit_plotdata(csv, PlotMetric::Loss, MobilityModel::Mass);
  auto rows = lines(t.text);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] ==
        "speed_mps,MAR_mean,MAR_ci_low,MAR_ci_high,GRC_mean,GRC_ci_low,GRC_ci_high,DEMC_mean,DEMC_ci_low,DEMC_ci_high");
  const double half = 1.959963984540054 * std::sqrt(200.0) / std::sqrt(2.0);
  char expect[256];
  std::snprintf(expect, sizeof expect, "5.000000,30.000000,%.6f,%.6f,10.000000,,,50.000000,,", 30 - half, 30 + half);
  CHECK(rows[2] == expect);
  CHECK(rows[1] == "1.000000,0.000000,,,,,,,,");
  CHECK(t.missing == std::vector<std::string>{"GRC @ 1.000000 m/s", "DEMC @ 1.000000 m/s"});

  t = emit_plotdata(csv, PlotMetric::Pdr, MobilityModel::RandomWaypoint);
  CHECK(t.text == "speed_mps,GRC_mean\n5.000000,0.100000\n");
  CHECK(t.missing.empty());

  CHECK_THROWS_AS(emit_plotdata("protocol,x\nMAR,mass\n", PlotMetric::Loss, MobilityModel::Mass), Error);
}

TEST_CASE("plot data from a sweep has every protocol") {
  SweepSpec spec = default_sweep();
  spec.models = {MobilityModel::Linear};
  spec.speeds = {5, 10};
  spec.seeds = {1};
  auto base = short_run(Protocol::MAR, MobilityModel::Linear, 0, 0);
  base.duration = 60;
  const auto res = run_sweep(base, spec, 8);
  const auto t = emit_plotdata(res.csv, PlotMetric::Pdr, MobilityModel::Linear);
  const auto rows = lines(t.text);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "speed_mps,MAR_mean,GRC_mean,GRC-R_mean,DECA_mean,DEMC_mean,DEMC-R_mean");
  CHECK(fields(rows[1]).size() == 7);
  CHECK(t.missing.empty());
}
