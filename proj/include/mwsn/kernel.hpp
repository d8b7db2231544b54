#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

namespace mwsn {

/// Simulation time in seconds.
using SimTime = double;

using NodeId = std::uint32_t;
inline constexpr NodeId kGlobalTarget = 0xffffffffu;

enum class EventKind : std::uint8_t {
  MobilityStep,
  PacketDelivery,
  RoundTimer,
  TrafficGeneration,
  RecoveryTimeout,
};

std::string_view to_string(EventKind kind) noexcept;

struct SimEvent {
  SimTime fire_at = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::RoundTimer;
  NodeId target = kGlobalTarget;
};

struct EventHandle {
  std::uint64_t seq = UINT64_MAX;
};

/// Single-threaded discrete-event core. Events are totally ordered by
/// (fire_at, seq); seq is the insertion counter, so equal-time events run
/// FIFO. Handlers may call schedule() and cancel() but nothing else.
class Kernel {
 public:
  using Handler = std::function<void()>;
  using TraceSink = std::function<void(const SimEvent&)>;

  Kernel() = default;
  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  /// Throws Error(ClockViolation) when fire_at < now().
  EventHandle schedule(SimTime fire_at, EventKind kind, NodeId target, Handler handler);
  EventHandle schedule_in(SimTime delay, EventKind kind, NodeId target, Handler handler) {
    return schedule(now_ + delay, kind, target, std::move(handler));
  }

  /// True iff the event was still pending. Idempotent.
  bool cancel(EventHandle handle) noexcept;

  /// Dispatches every event with fire_at <= until, then parks the clock at
  /// `until`. A throwing handler aborts the run with Error(Internal) naming
  /// the event.
  std::size_t run(SimTime until);

  SimTime now() const noexcept { return now_; }
  std::size_t pending() const noexcept { return pending_; }
  std::uint64_t scheduled_total() const noexcept { return next_seq_; }

  void set_trace(TraceSink sink) { trace_ = std::move(sink); }

 private:
  enum class Status : std::uint8_t { Pending, Fired, Cancelled };

  struct Entry {
    SimEvent event;
    Handler handler;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const noexcept {
      if (a.event.fire_at != b.event.fire_at) return a.event.fire_at > b.event.fire_at;
      return a.event.seq > b.event.seq;
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::vector<Status> status_;
  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::size_t pending_ = 0;
  TraceSink trace_;
};

/// `time<TAB>seq<TAB>kind<TAB>target` with time in fixed 6 decimals.
std::string format_trace_line(const SimEvent& ev);

}  // namespace mwsn
