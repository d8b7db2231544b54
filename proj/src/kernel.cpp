#include "mwsn/kernel.hpp"

#include <cmath>
#include <cstdio>

#include "mwsn/error.hpp"

namespace mwsn {

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::MobilityStep: return "mobility-step";
    case EventKind::PacketDelivery: return "packet-delivery";
    case EventKind::RoundTimer: return "round-timer";
    case EventKind::TrafficGeneration: return "traffic-generation";
    case EventKind::RecoveryTimeout: return "recovery-timeout";
  }
  return "unknown";
}

EventHandle Kernel::schedule(SimTime fire_at, EventKind kind, NodeId target, Handler handler) {
  if (std::isnan(fire_at) || fire_at < now_) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "cannot schedule %s at t=%.9g: clock is at t=%.9g",
                  std::string(to_string(kind)).c_str(), fire_at, now_);
    throw Error(ErrorCode::ClockViolation, buf);
  }
  const std::uint64_t seq = next_seq_++;
  status_.push_back(Status::Pending);
  queue_.push(Entry{SimEvent{fire_at, seq, kind, target}, std::move(handler)});
  ++pending_;
  return EventHandle{seq};
}

bool Kernel::cancel(EventHandle handle) noexcept {
  if (handle.seq >= status_.size() || status_[handle.seq] != Status::Pending) return false;
  status_[handle.seq] = Status::Cancelled;
  --pending_;
  return true;
}

std::size_t Kernel::run(SimTime until) {
  std::size_t dispatched = 0;
  while (!queue_.empty() && queue_.top().event.fire_at <= until) {
    // priority_queue::top is const; the entry is discarded right after.
    Entry entry = std::move(const_cast<Entry&>(queue_.top()));
    queue_.pop();
    if (status_[entry.event.seq] != Status::Pending) continue;
    status_[entry.event.seq] = Status::Fired;
    --pending_;
    now_ = entry.event.fire_at;
    if (trace_) trace_(entry.event);
    try {
      entry.handler();
    } catch (const std::exception& e) {
      throw Error(ErrorCode::Internal, "handler for event " + format_trace_line(entry.event) + " failed: " + e.what());
    }
    ++dispatched;
  }
  if (until > now_ && std::isfinite(until)) now_ = until;
  return dispatched;
}

std::string format_trace_line(const SimEvent& ev) {
  char buf[96];
  if (ev.target == kGlobalTarget) {
    std::snprintf(buf, sizeof buf, "%.6f\t%llu\t%s\tglobal", ev.fire_at,
                  static_cast<unsigned long long>(ev.seq), std::string(to_string(ev.kind)).c_str());
  } else {
    std::snprintf(buf, sizeof buf, "%.6f\t%llu\t%s\t%u", ev.fire_at, static_cast<unsigned long long>(ev.seq),
                  std::string(to_string(ev.kind)).c_str(), ev.target);
  }
  return buf;
}

}  // namespace mwsn
