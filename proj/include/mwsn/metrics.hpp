#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace mwsn {

/// Percentage packet loss ((n - m) / n) * 100 with m counting unique
/// deliveries. Rejects n == 0 and m > n.
double packet_loss_pct(std::uint64_t sent, std::uint64_t received);

/// delivered_total / sent. delivered_total may include duplicates, so the
/// ratio can exceed one. Rejects sent == 0.
double pdr(std::uint64_t delivered_total, std::uint64_t sent);

struct RunCounters {
  std::uint64_t sent = 0;
  std::uint64_t delivered_unique = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_flight = 0;
};

/// Finalized per-run metrics. The rate fields are absent for a run that
/// sent nothing.
struct MetricsRecord {
  std::uint64_t sent = 0;
  std::uint64_t delivered_unique = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_flight_at_end = 0;
  std::optional<double> loss_pct;
  std::optional<double> pdr_as_defined;  // duplicates included
  std::optional<double> pdr_unique;

  bool duplication() const noexcept { return pdr_as_defined && *pdr_as_defined > 1.0; }
  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

/// Enforces sent == delivered_unique + dropped + in_flight; a violation is
/// reported as Error(Internal) naming the leaking counters.
MetricsRecord finalize(const RunCounters& c);

struct Summary {
  double mean = 0.0;
  std::optional<double> stddev;  // sample std-dev, absent for a single value
  std::optional<double> ci_low;  // 95% normal approximation
  std::optional<double> ci_high;
  std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

struct Aggregate {
  Summary loss_pct;
  Summary pdr_as_defined;
  Summary pdr_unique;
  std::size_t runs = 0;  // records that carried metrics
};

/// Records without metrics (zero-traffic runs) are skipped. Throws on an
/// empty list or when no record carries metrics.
Aggregate aggregate(std::span<const MetricsRecord> records);

}  // namespace mwsn
