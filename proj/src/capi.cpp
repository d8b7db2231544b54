#include "mwsn/mwsn.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "mwsn/error.hpp"
#include "mwsn/experiment.hpp"

struct mwsn_config {
  std::string text;
  mwsn::Overrides overrides;
  mwsn::ParsedConfig parsed;
};

struct mwsn_run {
  mwsn::RunResult result;
};

namespace {

thread_local std::string g_last_error;

mwsn_status to_status(mwsn::ErrorCode code) {
  switch (code) {
    case mwsn::ErrorCode::InvalidArgument: return MWSN_E_INVALID_ARGUMENT;
    case mwsn::ErrorCode::ClockViolation: return MWSN_E_CLOCK_VIOLATION;
    case mwsn::ErrorCode::Config: return MWSN_E_CONFIG;
    case mwsn::ErrorCode::Range: return MWSN_E_RANGE;
    case mwsn::ErrorCode::Io: return MWSN_E_IO;
    case mwsn::ErrorCode::Internal: return MWSN_E_INTERNAL;
  }
  return MWSN_E_INTERNAL;
}

template <typename F>
mwsn_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return MWSN_OK;
  } catch (const mwsn::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MWSN_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MWSN_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw mwsn::Error(mwsn::ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void reparse(mwsn_config* cfg, std::string text, mwsn::Overrides overrides) {
  cfg->parsed = mwsn::parse_config(text, overrides);
  cfg->text = std::move(text);
  cfg->overrides = std::move(overrides);
}

}  // namespace

extern "C" {

const char* mwsn_version(void) { return "1.0.0"; }

const char* mwsn_rng_name(void) { return mwsn::kRngName.data(); }

const char* mwsn_last_error(void) { return g_last_error.c_str(); }

const char* mwsn_status_name(mwsn_status status) {
  switch (status) {
    case MWSN_OK: return "ok";
    case MWSN_E_INVALID_ARGUMENT: return "invalid argument";
    case MWSN_E_CLOCK_VIOLATION: return "clock violation";
    case MWSN_E_CONFIG: return "configuration error";
    case MWSN_E_RANGE: return "range error";
    case MWSN_E_IO: return "i/o error";
    case MWSN_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void mwsn_string_free(char* s) { std::free(s); }

mwsn_status mwsn_config_create(mwsn_config** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be NULL");
    auto* cfg = new mwsn_config();
    cfg->parsed = mwsn::parse_config("");
    *out = cfg;
  });
}

void mwsn_config_destroy(mwsn_config* cfg) { delete cfg; }

mwsn_status mwsn_config_load_string(mwsn_config* cfg, const char* text) {
  return guarded([&] {
    require(cfg && text, "config and text must not be NULL");
    std::string merged = cfg->text;
    if (!merged.empty() && merged.back() != '\n') merged += '\n';
    merged += text;
    reparse(cfg, std::move(merged), cfg->overrides);
  });
}

mwsn_status mwsn_config_load_file(mwsn_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg && path, "config and path must not be NULL");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mwsn::Error(mwsn::ErrorCode::Io, std::string("cannot open config file ") + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string merged = cfg->text;
    if (!merged.empty() && merged.back() != '\n') merged += '\n';
    merged += ss.str();
    reparse(cfg, std::move(merged), cfg->overrides);
  });
}

mwsn_status mwsn_config_set(mwsn_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg && key && value, "config, key and value must not be NULL");
    auto overrides = cfg->overrides;
    overrides.emplace_back(key, value);
    reparse(cfg, cfg->text, std::move(overrides));
  });
}

mwsn_status mwsn_config_echo(const mwsn_config* cfg, char** out_text) {
  return guarded([&] {
    require(cfg && out_text, "config and out_text must not be NULL");
    *out_text = dup_string(mwsn::echo(cfg->parsed.scenario));
  });
}

mwsn_status mwsn_config_hash(const mwsn_config* cfg, char out_hex[17]) {
  return guarded([&] {
    require(cfg && out_hex, "config and out_hex must not be NULL");
    const std::string h = mwsn::config_hash(cfg->parsed.scenario);
    std::memcpy(out_hex, h.c_str(), 17);
  });
}

mwsn_status mwsn_config_sweep_size(const mwsn_config* cfg, size_t* runs, size_t* cells) {
  return guarded([&] {
    require(cfg && runs && cells, "arguments must not be NULL");
    *runs = cfg->parsed.sweep.run_count();
    *cells = cfg->parsed.sweep.cell_count();
  });
}

mwsn_status mwsn_run_execute(const mwsn_config* cfg, unsigned trace_mask, mwsn_run** out) {
  return guarded([&] {
    require(cfg && out, "config and out must not be NULL");
    mwsn::TraceOptions trace;
    trace.events = (trace_mask & MWSN_TRACE_EVENTS) != 0;
    trace.mobility = (trace_mask & MWSN_TRACE_MOBILITY) != 0;
    trace.clusters = (trace_mask & MWSN_TRACE_CLUSTERS) != 0;
    auto* run = new mwsn_run{mwsn::run_one(cfg->parsed.scenario, trace)};
    *out = run;
  });
}

void mwsn_run_destroy(mwsn_run* run) { delete run; }

mwsn_status mwsn_run_metrics(const mwsn_run* run, mwsn_metrics* out) {
  return guarded([&] {
    require(run && out, "run and out must not be NULL");
    const auto& m = run->result.output.metrics;
    *out = mwsn_metrics{};
    out->sent = m.sent;
    out->delivered_unique = m.delivered_unique;
    out->duplicates = m.duplicates;
    out->dropped = m.dropped;
    out->in_flight = m.in_flight_at_end;
    out->has_rates = m.loss_pct.has_value() ? 1 : 0;
    out->loss_pct = m.loss_pct.value_or(0.0);
    out->pdr_as_defined = m.pdr_as_defined.value_or(0.0);
    out->pdr_unique = m.pdr_unique.value_or(0.0);
    std::memcpy(out->config_hash, run->result.config_hash.c_str(), 17);
  });
}

mwsn_status mwsn_run_csv(const mwsn_run* run, char** out_csv) {
  return guarded([&] {
    require(run && out_csv, "run and out_csv must not be NULL");
    const auto& r = run->result;
    *out_csv = dup_string(mwsn::csv_header() + '\n' + mwsn::csv_row(r.config, r.output.metrics, r.config_hash) + '\n');
  });
}

mwsn_status mwsn_run_trace(const mwsn_run* run, mwsn_trace_kind kind, char** out_text) {
  return guarded([&] {
    require(run && out_text, "run and out_text must not be NULL");
    const auto& o = run->result.output;
    switch (kind) {
      case MWSN_TRACE_EVENTS: *out_text = dup_string(o.event_trace); break;
      case MWSN_TRACE_MOBILITY: *out_text = dup_string(o.mobility_trace); break;
      case MWSN_TRACE_CLUSTERS: *out_text = dup_string(o.cluster_trace); break;
      default: throw mwsn::Error(mwsn::ErrorCode::InvalidArgument, "unknown trace kind");
    }
  });
}

mwsn_status mwsn_sweep_run(const mwsn_config* cfg, unsigned jobs, char** out_csv, char** out_failures) {
  return guarded([&] {
    require(cfg && out_csv, "config and out_csv must not be NULL");
    const auto result = mwsn::run_sweep(cfg->parsed.scenario, cfg->parsed.sweep, jobs);
    std::string failures;
    for (const auto& f : result.failures) failures += f + '\n';
    char* csv = dup_string(result.csv);
    if (out_failures) {
      try {
        *out_failures = dup_string(failures);
      } catch (...) {
        std::free(csv);
        throw;
      }
    }
    *out_csv = csv;
  });
}

mwsn_status mwsn_plotdata(const char* csv, mwsn_plot_metric metric, const char* mobility, char** out_table,
                          char** out_missing) {
  return guarded([&] {
    require(csv && mobility && out_table, "csv, mobility and out_table must not be NULL");
    const auto model = mwsn::parse_mobility_model(mobility);
    if (!model) throw mwsn::Error(mwsn::ErrorCode::InvalidArgument, std::string("unknown mobility model ") + mobility);
    require(metric == MWSN_PLOT_LOSS || metric == MWSN_PLOT_PDR, "unknown plot metric");
    const auto table =
        mwsn::emit_plotdata(csv, metric == MWSN_PLOT_LOSS ? mwsn::PlotMetric::Loss : mwsn::PlotMetric::Pdr, *model);
    std::string missing;
    for (const auto& m : table.missing) missing += m + '\n';
    char* text = dup_string(table.text);
    if (out_missing) {
      try {
        *out_missing = dup_string(missing);
      } catch (...) {
        std::free(text);
        throw;
      }
    }
    *out_table = text;
  });
}

}  // extern "C"
