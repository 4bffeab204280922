#include "epon/trace.hpp"

#include <charconv>
#include <map>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace epon::trace {

std::string TraceConfig::header_line() const {
  return fmt::format(
      "# config cycle_len_ns={} cap_bytes={} report_duration_ns={} report_deadline_ns={} q_w={} "
      "delta_on_ns={} wake_lead_ns={} frame_bytes={} line_rate_bps={} duration_ns={}",
      cycle_len.count(), cap_bytes, report_duration.count(), report_deadline.count(), q_w, delta_on.count(),
      wake_lead.count(), frame_bytes, line_rate_bps, duration.count());
}

TraceConfig TraceConfig::from_header_line(std::string_view line) {
  constexpr std::string_view prefix = "# config ";
  if (!line.starts_with(prefix)) throw std::invalid_argument("trace header: missing '# config' line");
  line.remove_prefix(prefix.size());
  std::map<std::string, std::string, std::less<>> kv;
  while (!line.empty()) {
    const auto sp = line.find(' ');
    const std::string_view tok = line.substr(0, sp);
    line = sp == std::string_view::npos ? std::string_view{} : line.substr(sp + 1);
    if (tok.empty()) continue;
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("trace header: malformed token");
    kv.emplace(std::string(tok.substr(0, eq)), std::string(tok.substr(eq + 1)));
  }
  auto get_int = [&](std::string_view key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument(fmt::format("trace header: missing {}", key));
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc{} || p != it->second.data() + it->second.size()) {
      throw std::invalid_argument(fmt::format("trace header: bad value for {}", key));
    }
    return v;
  };
  TraceConfig c;
  c.cycle_len = SimTime{get_int("cycle_len_ns")};
  c.cap_bytes = get_int("cap_bytes");
  c.report_duration = SimTime{get_int("report_duration_ns")};
  c.report_deadline = SimTime{get_int("report_deadline_ns")};
  c.q_w = get_int("q_w");
  c.delta_on = SimTime{get_int("delta_on_ns")};
  c.wake_lead = SimTime{get_int("wake_lead_ns")};
  c.frame_bytes = get_int("frame_bytes");
  auto rate = kv.find("line_rate_bps");
  if (rate == kv.end()) throw std::invalid_argument("trace header: missing line_rate_bps");
  c.line_rate_bps = std::stod(rate->second);
  c.duration = SimTime{get_int("duration_ns")};
  if (c.cycle_len <= SimTime{0}) throw std::invalid_argument("trace header: cycle_len_ns must be > 0");
  return c;
}

void TraceWriter::emit() {
  sink_(buf_);
  buf_.clear();
}

void TraceWriter::header(const TraceConfig& cfg) {
  buf_ = kMagic;
  emit();
  buf_ = cfg.header_line();
  emit();
}

void TraceWriter::cycle(SimTime t, std::int64_t index) {
  fmt::format_to(std::back_inserter(buf_), "{} cycle {}", t.count(), index);
  emit();
}

void TraceWriter::gate(SimTime t, const olt::GateMessage& g) {
  fmt::format_to(std::back_inserter(buf_), "{} gate {} {} {} {}", t.count(), g.cycle_index, g.report_time.count(),
                 g.data_slot_start.count(), g.data_grant_bytes);
  emit();
}

void TraceWriter::report(SimTime t, std::int64_t queue_bytes, std::int64_t queue_frames) {
  fmt::format_to(std::back_inserter(buf_), "{} report {} {}", t.count(), queue_bytes, queue_frames);
  emit();
}

void TraceWriter::state(SimTime t, onu::OnuState from, onu::OnuState to) {
  fmt::format_to(std::back_inserter(buf_), "{} state {} {}", t.count(), onu::to_string(from), onu::to_string(to));
  emit();
}

void TraceWriter::power(SimTime t, bool on) {
  fmt::format_to(std::back_inserter(buf_), "{} power {}", t.count(), on ? "on" : "off");
  emit();
}

void TraceWriter::tx(SimTime t, const traffic::Frame& f) {
  fmt::format_to(std::back_inserter(buf_), "{} tx {} {} {} {}", t.count(), f.id, f.arrival.count(),
                 f.departure.value_or(SimTime{-1}).count(), f.size_bytes);
  emit();
}

void TraceWriter::arrival(SimTime t, std::uint64_t id, std::int64_t queue_frames) {
  fmt::format_to(std::back_inserter(buf_), "{} arrival {} {}", t.count(), id, queue_frames);
  emit();
}

void TraceWriter::timer(SimTime t, onu::TimerKind kind) {
  fmt::format_to(std::back_inserter(buf_), "{} timer {}", t.count(), onu::to_string(kind));
  emit();
}

void TraceWriter::violation(SimTime t, std::string_view rule, std::string_view detail) {
  fmt::format_to(std::back_inserter(buf_), "{} violation {} {}", t.count(), rule, detail);
  emit();
}

void TraceWriter::end(SimTime t, std::int64_t queue_frames, std::uint64_t frames_in, std::uint64_t frames_out) {
  fmt::format_to(std::back_inserter(buf_), "{} end {} {} {}", t.count(), queue_frames, frames_in, frames_out);
  emit();
}

TraceWriter::LineSink stream_sink(std::ostream& os) {
  return [&os](std::string_view line) {
    os.write(line.data(), static_cast<std::streamsize>(line.size()));
    os.put('\n');
  };
}

TraceWriter::LineSink string_sink(std::string& out) {
  return [&out](std::string_view line) {
    out.append(line);
    out.push_back('\n');
  };
}

}  // namespace epon::trace
