#include "epon/sim_core.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace epon::sim {

std::string_view to_string(EventClass cls) {
  switch (cls) {
    case EventClass::CycleBoundary: return "cycle-boundary";
    case EventClass::GateDelivery: return "gate-delivery";
    case EventClass::ReportSlot: return "report-slot";
    case EventClass::DataSlot: return "data-slot";
    case EventClass::FrameArrival: return "frame-arrival";
    case EventClass::Timer: return "timer";
  }
  return "unknown";
}

EventHandle Engine::schedule(SimTime time, EventClass cls, Callback callback) {
  if (time < now_) {
    throw std::logic_error("event scheduled in the past: t=" + std::to_string(time.count()) +
                           " ns, clock=" + std::to_string(now_.count()) + " ns");
  }
  const std::uint64_t seq = next_seq_++;
  heap_.push_back(Entry{EventKey{time, cls, seq}, std::move(callback)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  status_.push_back(Status::Pending);
  ++live_;
  return EventHandle{seq};
}

bool Engine::cancel(EventHandle handle) {
  if (!handle.valid() || handle.seq() >= status_.size()) return false;
  Status& s = status_[handle.seq()];
  if (s != Status::Pending) return false;
  s = Status::Cancelled;
  --live_;
  return true;
}

EventTrace Engine::run_until(SimTime t_end) {
  if (t_end < now_) throw std::logic_error("run_until target is earlier than the clock");
  EventTrace trace;
  while (!heap_.empty() && heap_.front().key.time <= t_end) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Entry entry = std::move(heap_.back());
    heap_.pop_back();
    Status& s = status_[entry.key.seq];
    if (s == Status::Cancelled) continue;
    s = Status::Fired;
    --live_;
    now_ = entry.key.time;
    ++executed_;
    if (recording_) trace.push_back(entry.key);
    entry.callback();
  }
  now_ = t_end;
  return trace;
}

}  // namespace epon::sim
