/*
 * C interface to the mobile WSN clustering simulator.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Every fallible call returns an mwsn_status; on failure the message is
 * available from mwsn_last_error() on the calling thread until the next call.
 * Strings returned through char** out-parameters are heap copies owned by
 * the caller and must be released with mwsn_string_free().
 */
#ifndef MWSN_H
#define MWSN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(MWSN_BUILDING_LIBRARY)
#    define MWSN_API __declspec(dllexport)
#  else
#    define MWSN_API __declspec(dllimport)
#  endif
#else
#  define MWSN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mwsn_status {
  MWSN_OK = 0,
  MWSN_E_INVALID_ARGUMENT = 1,
  MWSN_E_CLOCK_VIOLATION = 2,
  MWSN_E_CONFIG = 3,
  MWSN_E_RANGE = 4,
  MWSN_E_IO = 5,
  MWSN_E_INTERNAL = 6
} mwsn_status;

typedef enum mwsn_trace_kind {
  MWSN_TRACE_EVENTS = 1,   /* time<TAB>seq<TAB>kind<TAB>target */
  MWSN_TRACE_MOBILITY = 2, /* time<TAB>node<TAB>x<TAB>y */
  MWSN_TRACE_CLUSTERS = 4  /* round<TAB>protocol<TAB>head<TAB>member_count */
} mwsn_trace_kind;

typedef enum mwsn_plot_metric { MWSN_PLOT_LOSS = 0, MWSN_PLOT_PDR = 1 } mwsn_plot_metric;

typedef struct mwsn_config mwsn_config;
typedef struct mwsn_run mwsn_run;

typedef struct mwsn_metrics {
  uint64_t sent;
  uint64_t delivered_unique;
  uint64_t duplicates;
  uint64_t dropped;
  uint64_t in_flight;
  int has_rates; /* 0 when the run sent nothing */
  double loss_pct;
  double pdr_as_defined;
  double pdr_unique;
  char config_hash[17];
} mwsn_metrics;

MWSN_API const char* mwsn_version(void);
MWSN_API const char* mwsn_rng_name(void);
MWSN_API const char* mwsn_last_error(void);
MWSN_API const char* mwsn_status_name(mwsn_status status);
MWSN_API void mwsn_string_free(char* s);

/* Configuration: starts at defaults; text and key/value overrides layer on
 * top in call order. Validation runs on every change. */
MWSN_API mwsn_status mwsn_config_create(mwsn_config** out);
MWSN_API void mwsn_config_destroy(mwsn_config* cfg);
MWSN_API mwsn_status mwsn_config_load_file(mwsn_config* cfg, const char* path);
MWSN_API mwsn_status mwsn_config_load_string(mwsn_config* cfg, const char* text);
MWSN_API mwsn_status mwsn_config_set(mwsn_config* cfg, const char* key, const char* value);
MWSN_API mwsn_status mwsn_config_echo(const mwsn_config* cfg, char** out_text);
MWSN_API mwsn_status mwsn_config_hash(const mwsn_config* cfg, char out_hex[17]);
MWSN_API mwsn_status mwsn_config_sweep_size(const mwsn_config* cfg, size_t* runs, size_t* cells);

/* Single replication. trace_mask is a bitwise OR of mwsn_trace_kind. */
MWSN_API mwsn_status mwsn_run_execute(const mwsn_config* cfg, unsigned trace_mask, mwsn_run** out);
MWSN_API void mwsn_run_destroy(mwsn_run* run);
MWSN_API mwsn_status mwsn_run_metrics(const mwsn_run* run, mwsn_metrics* out);
/* Header line plus one data row, LF terminated. */
MWSN_API mwsn_status mwsn_run_csv(const mwsn_run* run, char** out_csv);
MWSN_API mwsn_status mwsn_run_trace(const mwsn_run* run, mwsn_trace_kind kind, char** out_text);

/* Sweep over the configuration's sweep axes. Failed cells become failed rows;
 * their diagnostics are joined (one per line) into *out_failures when the
 * pointer is non-NULL. */
MWSN_API mwsn_status mwsn_sweep_run(const mwsn_config* cfg, unsigned jobs, char** out_csv, char** out_failures);

/* Plot-ready table for one figure from sweep CSV. mobility is "rwp", "mass"
 * or "linear". Missing cells are listed one per line in *out_missing when
 * the pointer is non-NULL. */
MWSN_API mwsn_status mwsn_plotdata(const char* csv, mwsn_plot_metric metric, const char* mobility, char** out_table,
                                   char** out_missing);

#ifdef __cplusplus
}
#endif

#endif /* MWSN_H */
