#pragma once

// Line-oriented run trace. One record per line, `<time_ns> <kind> <fields...>`,
// preceded by two `#` header lines. Field lists are documented in
// docs/trace-format.md; the format is stable so traces can be diffed.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

#include "epon/olt.hpp"
#include "epon/onu.hpp"
#include "epon/sim_core.hpp"

namespace epon::trace {

inline constexpr std::string_view kMagic = "# epon-trace 1";

/// Parameters the trace checker needs; serialized in the header.
struct TraceConfig {
  SimTime cycle_len{1'500'000};
  std::int64_t cap_bytes = 37'500;
  SimTime report_duration{52};
  SimTime report_deadline{50'000'000};
  std::int64_t q_w = 10;
  SimTime delta_on{2'000'000};
  SimTime wake_lead{3'500'000};
  std::int64_t frame_bytes = 1500;
  double line_rate_bps = 10e9;
  SimTime duration{0};

  [[nodiscard]] std::string header_line() const;
  /// Parses the `# config ...` line; throws std::invalid_argument.
  static TraceConfig from_header_line(std::string_view line);
};

/// Formats records and hands each finished line (without newline) to a consumer.
class TraceWriter {
 public:
  using LineSink = std::function<void(std::string_view)>;

  explicit TraceWriter(LineSink sink) : sink_(std::move(sink)) {}

  void header(const TraceConfig& cfg);
  void cycle(SimTime t, std::int64_t index);
  void gate(SimTime t, const olt::GateMessage& g);
  void report(SimTime t, std::int64_t queue_bytes, std::int64_t queue_frames);
  void state(SimTime t, onu::OnuState from, onu::OnuState to);
  void power(SimTime t, bool on);
  void tx(SimTime t, const traffic::Frame& f);
  void arrival(SimTime t, std::uint64_t id, std::int64_t queue_frames);
  void timer(SimTime t, onu::TimerKind kind);
  void violation(SimTime t, std::string_view rule, std::string_view detail);
  void end(SimTime t, std::int64_t queue_frames, std::uint64_t frames_in, std::uint64_t frames_out);

 private:
  void emit();

  LineSink sink_;
  std::string buf_;
};

/// Sink writing newline-terminated lines to a stream.
TraceWriter::LineSink stream_sink(std::ostream& os);

/// Sink appending newline-terminated lines to a string.
TraceWriter::LineSink string_sink(std::string& out);

}  // namespace epon::trace
