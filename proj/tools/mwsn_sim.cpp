// Command-line front end. Talks to the simulator exclusively through the C API.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mwsn/mwsn.h"

namespace {

struct CString {
  char* p = nullptr;
  ~CString() { mwsn_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct ConfigDeleter {
  void operator()(mwsn_config* c) const { mwsn_config_destroy(c); }
};
struct RunDeleter {
  void operator()(mwsn_run* r) const { mwsn_run_destroy(r); }
};

class Failure : public std::runtime_error {
 public:
  Failure(mwsn_status s, const std::string& what) : std::runtime_error(what), status(s) {}
  mwsn_status status;
};

void check(mwsn_status s, const std::string& context) {
  if (s != MWSN_OK) throw Failure(s, context + ": " + mwsn_last_error());
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure(MWSN_E_IO, "cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure(MWSN_E_IO, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_plots(const std::string& csv, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (auto metric : {MWSN_PLOT_LOSS, MWSN_PLOT_PDR}) {
    for (const char* model : {"rwp", "mass", "linear"}) {
      CString table, missing;
      check(mwsn_plotdata(csv.c_str(), metric, model, &table.p, &missing.p), "plot data");
      const std::string name = std::string(metric == MWSN_PLOT_LOSS ? "loss_" : "pdr_") + model + ".csv";
      write_text((dir / name).string(), table.str());
      std::istringstream lines(missing.str());
      for (std::string line; std::getline(lines, line);) std::cerr << "missing cell in " << name << ": " << line << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mobile WSN clustering-protocol simulator"};
  app.set_version_flag("--version", mwsn_version());

  std::string config_file, out_path = "-", plot_dir, plot_from;
  std::optional<std::string> protocol, mobility, speed, nodes, seed, duration;
  std::vector<std::string> sets;
  bool sweep = false, show_echo = false;
  unsigned jobs = 1;
  std::string trace_events, trace_mobility, clusters;

  app.add_option("--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--protocol", protocol, "MAR | GRC | GRC-R | DECA | DEMC | DEMC-R");
  app.add_option("--mobility", mobility, "rwp | mass | linear");
  app.add_option("--speed", speed, "node speed in m/s");
  app.add_option("--nodes", nodes, "number of sensor nodes");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--duration", duration, "simulated seconds");
  app.add_option("--set", sets, "extra key=value override (repeatable)");
  app.add_option("--out", out_path, "CSV destination ('-' for stdout)");
  app.add_flag("--sweep", sweep, "run the protocol x mobility x speed x seed sweep");
  app.add_option("--jobs", jobs, "parallel replications during a sweep")->check(CLI::PositiveNumber);
  app.add_option("--plot-dir", plot_dir, "write the six figure tables here (with --sweep)");
  app.add_option("--plot-from", plot_from, "build figure tables from an existing sweep CSV")->check(CLI::ExistingFile);
  app.add_option("--trace-events", trace_events, "dump dispatched events to this file");
  app.add_option("--trace-mobility", trace_mobility, "dump sampled positions to this file");
  app.add_option("--clusters", clusters, "dump per-round cluster snapshots to this file");
  app.add_flag("--echo", show_echo, "print the resolved configuration to stderr");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!plot_from.empty()) {
      if (plot_dir.empty()) throw Failure(MWSN_E_INVALID_ARGUMENT, "--plot-from requires --plot-dir");
      write_plots(read_text(plot_from), plot_dir);
      return 0;
    }

    mwsn_config* raw = nullptr;
    check(mwsn_config_create(&raw), "create config");
    std::unique_ptr<mwsn_config, ConfigDeleter> cfg(raw);
    if (!config_file.empty()) check(mwsn_config_load_file(cfg.get(), config_file.c_str()), "config file");
    auto set = [&](const char* key, const std::optional<std::string>& v) {
      if (v) check(mwsn_config_set(cfg.get(), key, v->c_str()), std::string("--") + key);
    };
    set("protocol", protocol);
    set("mobility", mobility);
    set("speed", speed);
    set("nodes", nodes);
    set("seed", seed);
    set("duration", duration);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Failure(MWSN_E_INVALID_ARGUMENT, "--set expects key=value, got " + kv);
      check(mwsn_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()), "--set " + kv);
    }
    if (show_echo) {
      CString text;
      check(mwsn_config_echo(cfg.get(), &text.p), "echo");
      std::cerr << text.str() << "rng = " << mwsn_rng_name() << '\n';
    }

    if (sweep) {
      if (!trace_events.empty() || !trace_mobility.empty() || !clusters.empty()) {
        throw Failure(MWSN_E_INVALID_ARGUMENT, "trace flags apply to single runs only");
      }
      CString csv, failures;
      check(mwsn_sweep_run(cfg.get(), jobs, &csv.p, &failures.p), "sweep");
      write_text(out_path, csv.str());
      if (!failures.str().empty()) std::cerr << failures.str();
      if (!plot_dir.empty()) write_plots(csv.str(), plot_dir);
      return 0;
    }

    unsigned mask = 0;
    if (!trace_events.empty()) mask |= MWSN_TRACE_EVENTS;
    if (!trace_mobility.empty()) mask |= MWSN_TRACE_MOBILITY;
    if (!clusters.empty()) mask |= MWSN_TRACE_CLUSTERS;
    mwsn_run* run_raw = nullptr;
    check(mwsn_run_execute(cfg.get(), mask, &run_raw), "run");
    std::unique_ptr<mwsn_run, RunDeleter> run(run_raw);
    CString csv;
    check(mwsn_run_csv(run.get(), &csv.p), "csv");
    write_text(out_path, csv.str());
    auto dump = [&](const std::string& path, mwsn_trace_kind kind) {
      if (path.empty()) return;
      CString text;
      check(mwsn_run_trace(run.get(), kind, &text.p), "trace");
      write_text(path, text.str());
    };
    dump(trace_events, MWSN_TRACE_EVENTS);
    dump(trace_mobility, MWSN_TRACE_MOBILITY);
    dump(clusters, MWSN_TRACE_CLUSTERS);
  } catch (const Failure& f) {
    std::cerr << "mwsn-sim: " << f.what() << '\n';
    return 1 + static_cast<int>(f.status);
  } catch (const std::exception& e) {
    std::cerr << "mwsn-sim: " << e.what() << '\n';
    return 1 + static_cast<int>(MWSN_E_INTERNAL);
  }
  return 0;
}
