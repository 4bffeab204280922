#pragma once

// Discrete-event engine: integer-nanosecond clock and a totally ordered
// event queue. Events at the same instant run in EventClass order, then in
// insertion order, so every run of a given configuration is reproducible.

#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace epon {

/// Simulated time, in integer nanoseconds since the start of the run.
using SimTime = std::chrono::duration<std::int64_t, std::nano>;

namespace sim {

// Appending is fine; reordering changes the replay of existing traces.
enum class EventClass : std::uint8_t {
  CycleBoundary = 0,
  GateDelivery,
  ReportSlot,
  DataSlot,
  FrameArrival,
  Timer,
};

std::string_view to_string(EventClass cls);

struct EventKey {
  SimTime time{};
  EventClass cls{};
  std::uint64_t seq = 0;

  friend auto operator<=>(const EventKey&, const EventKey&) = default;
};

class EventHandle {
 public:
  EventHandle() = default;
  explicit EventHandle(std::uint64_t seq) : seq_(seq) {}
  [[nodiscard]] std::uint64_t seq() const { return seq_; }
  [[nodiscard]] bool valid() const { return seq_ != kInvalid; }

 private:
  static constexpr std::uint64_t kInvalid = ~std::uint64_t{0};
  std::uint64_t seq_ = kInvalid;
};

/// Executed-event record, captured when trace recording is enabled.
using EventTrace = std::vector<EventKey>;

class Engine {
 public:
  using Callback = std::function<void()>;

  Engine() = default;
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;
  Engine(Engine&&) = default;
  Engine& operator=(Engine&&) = default;

  [[nodiscard]] SimTime now() const { return now_; }

  /// Throws std::logic_error when `time` is earlier than the current clock.
  EventHandle schedule(SimTime time, EventClass cls, Callback callback);

  /// True if the event was still pending; it will never fire.
  bool cancel(EventHandle handle);

  /// Executes every pending event with time <= t_end, then sets the clock to
  /// t_end. The returned trace is empty unless recording is enabled.
  EventTrace run_until(SimTime t_end);

  void set_recording(bool on) { recording_ = on; }
  [[nodiscard]] std::size_t pending() const { return live_; }
  [[nodiscard]] std::uint64_t executed() const { return executed_; }

 private:
  enum class Status : std::uint8_t { Pending, Fired, Cancelled };

  struct Entry {
    EventKey key;
    Callback callback;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const { return b.key < a.key; }
  };

  std::vector<Entry> heap_;
  std::vector<Status> status_;
  SimTime now_{0};
  std::uint64_t next_seq_ = 0;
  std::uint64_t executed_ = 0;
  std::size_t live_ = 0;
  bool recording_ = false;
};

}  // namespace sim
}  // namespace epon
