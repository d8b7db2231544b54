#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mwsn/world.hpp"

namespace mwsn {

struct SweepSpec {
  std::vector<Protocol> protocols;
  std::vector<MobilityModel> models;
  std::vector<double> speeds;
  std::vector<std::uint64_t> seeds;

  std::size_t run_count() const noexcept { return protocols.size() * models.size() * speeds.size() * seeds.size(); }
  std::size_t cell_count() const noexcept { return protocols.size() * models.size() * speeds.size(); }
};

/// Default sweep: all six protocols, all three models, speeds {1,5,10,15,20},
/// seeds 1..20.
SweepSpec default_sweep();

struct ParsedConfig {
  ScenarioConfig scenario;
  SweepSpec sweep;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Parses line-oriented `key = value` text (`#` starts a comment), then
/// applies overrides in order. Unset keys keep their defaults. Errors are
/// Error(Config) with a line number or override name and the key.
ParsedConfig parse_config(std::string_view text, const Overrides& overrides = {});
ParsedConfig load_config(const std::filesystem::path& file, const Overrides& overrides = {});

/// Every scenario key that parse_config accepts, in echo order.
std::vector<std::string> scenario_keys();

/// Canonical `key = value` dump. parse_config(echo(cfg)).scenario == cfg in
/// every field, so a run is reproducible from its echo alone.
std::string echo(const ScenarioConfig& cfg);
/// 16 hex digits of fnv1a64(echo(cfg)).
std::string config_hash(const ScenarioConfig& cfg);

struct RunResult {
  ScenarioConfig config;
  std::string config_echo;
  std::string config_hash;
  RunOutput output;
};

RunResult run_one(const ScenarioConfig& cfg, TraceOptions trace = {});

std::string csv_header();
std::string csv_row(const ScenarioConfig& cfg, const MetricsRecord& m, const std::string& hash);

struct SweepResult {
  std::string csv;
  std::vector<std::string> failures;  // one diagnostic per failed cell
};

/// Runs the cross product of `spec` over `base`, up to `jobs` replications at
/// a time. Output is in canonical (protocol, mobility, speed, seed) order with
/// one aggregate row (seed column "mean") after each cell's runs; it does not
/// depend on `jobs`.
SweepResult run_sweep(const ScenarioConfig& base, const SweepSpec& spec, unsigned jobs);

enum class PlotMetric { Loss, Pdr };

struct PlotTable {
  std::string text;
  std::vector<std::string> missing;  // "<protocol> @ <speed> m/s" per absent cell
};

/// One figure's table from sweep CSV: x = speed, one mean (plus 95% CI
/// bounds when any cell has more than one replication) per protocol.
PlotTable emit_plotdata(std::string_view csv, PlotMetric metric, MobilityModel model);

}  // namespace mwsn
