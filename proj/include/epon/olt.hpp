#pragma once

// OLT side of the MPCP exchange: a fixed-length DBA cycle, one gate per
// cycle carrying a report slot and a data grant, grants sized from the
// previous cycle's report, and the report-deadline watchdog.

#include <cstdint>
#include <optional>
#include <string>

#include "epon/sim_core.hpp"

namespace epon::olt {

struct DbaConfig {
  SimTime cycle_len{1'500'000};
  std::int64_t cap_bytes = 37'500;
  SimTime report_duration{52};  // 64-byte MPCPDU at 10 Gb/s, rounded up
  SimTime report_deadline{50'000'000};
  double line_rate_bps = 10e9;  // nominal upstream rate

  void validate() const;
};

/// Serialization time of `bytes` at `rate_bps`, rounded up to whole ns.
SimTime transmission_time(std::int64_t bytes, double rate_bps);

struct GateMessage {
  std::int64_t cycle_index = 0;
  SimTime report_time{};
  SimTime data_slot_start{};
  std::int64_t data_grant_bytes = 0;
};

struct ReportMessage {
  SimTime sent_at{};
  std::int64_t queue_bytes = 0;
};

enum class LinkStatus { Connected, Disconnected };

class Olt {
 public:
  explicit Olt(const DbaConfig& cfg);

  [[nodiscard]] const DbaConfig& config() const { return cfg_; }
  [[nodiscard]] SimTime cycle_start(std::int64_t index) const;
  [[nodiscard]] std::int64_t cycle_of(SimTime t) const { return t / cfg_.cycle_len; }

  /// Gate for cycle `cycle_index`, sized from the report received in the
  /// cycle before it (none or zero -> no data grant).
  [[nodiscard]] GateMessage make_gate(std::int64_t cycle_index,
                                      const std::optional<ReportMessage>& last_report) const;

  /// make_gate() from the stored report of cycle_index-1; remembers the
  /// gate so that later reports can be checked against its slot.
  GateMessage issue_gate(std::int64_t cycle_index);

  /// Returns a protocol-violation description when the report was sent
  /// outside the granted slot or is a second report in one cycle.
  std::optional<std::string> on_report(const ReportMessage& report, SimTime now);

  [[nodiscard]] LinkStatus watchdog_check(SimTime now) const;
  [[nodiscard]] SimTime last_report_at() const { return last_report_at_; }

 private:
  DbaConfig cfg_;
  std::optional<GateMessage> current_gate_;
  std::optional<ReportMessage> report_this_cycle_;
  std::int64_t report_cycle_ = -1;
  SimTime last_report_at_{0};
};

}  // namespace epon::olt
