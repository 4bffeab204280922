#include "epon/olt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epon::olt {

SimTime transmission_time(std::int64_t bytes, double rate_bps) {
  return SimTime{static_cast<std::int64_t>(std::ceil(static_cast<double>(bytes) * 8.0 * 1e9 / rate_bps - 1e-9))};
}

void DbaConfig::validate() const {
  if (cycle_len <= SimTime{0}) throw std::invalid_argument("dba.cycle_len_ns must be > 0");
  if (cap_bytes <= 0) throw std::invalid_argument("dba.cap_bytes must be > 0");
  if (report_duration < SimTime{0}) throw std::invalid_argument("dba.report_duration_ns must be >= 0");
  if (!(line_rate_bps > 0.0)) throw std::invalid_argument("dba.line_rate_bps must be > 0");
  if (report_deadline < cycle_len) {
    throw std::invalid_argument("dba.report_deadline_ns must be >= dba.cycle_len_ns");
  }
  if (report_duration + transmission_time(cap_bytes, line_rate_bps) > cycle_len) {
    throw std::invalid_argument("dba.cap_bytes: report plus data slot does not fit in one cycle");
  }
}

Olt::Olt(const DbaConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

SimTime Olt::cycle_start(std::int64_t index) const {
  if (index < 0) throw std::invalid_argument("cycle index must be >= 0");
  return index * cfg_.cycle_len;
}

GateMessage Olt::make_gate(std::int64_t cycle_index, const std::optional<ReportMessage>& last_report) const {
  const SimTime start = cycle_start(cycle_index);
  const std::int64_t grant = last_report ? std::min(last_report->queue_bytes, cfg_.cap_bytes) : 0;
  return GateMessage{cycle_index, start, start + cfg_.report_duration, std::max<std::int64_t>(grant, 0)};
}

GateMessage Olt::issue_gate(std::int64_t cycle_index) {
  std::optional<ReportMessage> previous;
  if (report_this_cycle_ && report_cycle_ == cycle_index - 1) previous = report_this_cycle_;
  current_gate_ = make_gate(cycle_index, previous);
  return *current_gate_;
}

std::optional<std::string> Olt::on_report(const ReportMessage& report, SimTime now) {
  const std::int64_t cycle = cycle_of(now);
  std::optional<std::string> violation;
  if (report_cycle_ == cycle) {
    violation = "second report in cycle " + std::to_string(cycle);
  } else if (!current_gate_ || current_gate_->cycle_index != cycle || current_gate_->report_time != now) {
    violation = "report at " + std::to_string(now.count()) + " ns outside the granted slot";
  }
  if (!violation) {
    report_this_cycle_ = report;
    report_cycle_ = cycle;
  }
  last_report_at_ = now;
  return violation;
}

LinkStatus Olt::watchdog_check(SimTime now) const {
  return now - last_report_at_ > cfg_.report_deadline ? LinkStatus::Disconnected : LinkStatus::Connected;
}

}  // namespace epon::olt
