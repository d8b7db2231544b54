#include "mwsn/metrics.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mwsn/error.hpp"

namespace mwsn {

double packet_loss_pct(std::uint64_t sent, std::uint64_t received) {
  if (sent == 0) throw Error(ErrorCode::InvalidArgument, "packet loss undefined for zero packets sent");
  if (received > sent) {
    throw Error(ErrorCode::InvalidArgument, "received (" + std::to_string(received) + ") exceeds sent (" +
                                                std::to_string(sent) + "); duplicates leaked into m");
  }
  return static_cast<double>(sent - received) / static_cast<double>(sent) * 100.0;
}

double pdr(std::uint64_t delivered_total, std::uint64_t sent) {
  if (sent == 0) throw Error(ErrorCode::InvalidArgument, "delivery ratio undefined for zero packets sent");
  return static_cast<double>(delivered_total) / static_cast<double>(sent);
}

MetricsRecord finalize(const RunCounters& c) {
  if (c.sent != c.delivered_unique + c.dropped + c.in_flight) {
    throw Error(ErrorCode::Internal, "counter leak: sent=" + std::to_string(c.sent) +
                                         " but delivered_unique+dropped+in_flight=" +
                                         std::to_string(c.delivered_unique + c.dropped + c.in_flight));
  }
  MetricsRecord r;
  r.sent = c.sent;
  r.delivered_unique = c.delivered_unique;
  r.duplicates = c.duplicates;
  r.dropped = c.dropped;
  r.in_flight_at_end = c.in_flight;
  if (c.sent > 0) {
    r.loss_pct = packet_loss_pct(c.sent, c.delivered_unique);
    r.pdr_as_defined = pdr(c.delivered_unique + c.duplicates, c.sent);
    r.pdr_unique = pdr(c.delivered_unique, c.sent);
  }
  return r;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "cannot summarize an empty sample");
  Summary s;
  s.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    const double half = 1.959963984540054 * sd / std::sqrt(static_cast<double>(values.size()));
    s.stddev = sd;
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
  }
  return s;
}

Aggregate aggregate(std::span<const MetricsRecord> records) {
  if (records.empty()) throw Error(ErrorCode::InvalidArgument, "aggregate needs at least one record");
  std::vector<double> loss, pdr_def, pdr_uni;
  for (const auto& r : records) {
    if (!r.loss_pct) continue;
    loss.push_back(*r.loss_pct);
    pdr_def.push_back(*r.pdr_as_defined);
    pdr_uni.push_back(*r.pdr_unique);
  }
  if (loss.empty()) throw Error(ErrorCode::InvalidArgument, "no record carries metrics (all runs sent nothing)");
  Aggregate a;
  a.loss_pct = summarize(loss);
  a.pdr_as_defined = summarize(pdr_def);
  a.pdr_unique = summarize(pdr_uni);
  a.runs = loss.size();
  return a;
}

}  // namespace mwsn
