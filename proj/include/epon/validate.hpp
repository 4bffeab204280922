#pragma once

// Independent checker for serialized run traces. It re-derives the protocol
// and automaton rules from the text alone and shares no transition code with
// the simulator.

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "epon/sim_core.hpp"
#include "epon/trace.hpp"

namespace epon::validate {

enum class Rule : std::uint8_t {
  StateSequence,         // only OFF->WAIT->TRANS->ON->OFF
  UnpoweredTransmission, // report or tx with the transmitter off
  TransData,             // tx while in TRANS
  GrantRule,             // grant == min(previous cycle's report, cap)
  GrantOverrun,          // bytes sent in a cycle <= that cycle's grant
  ReportCadence,         // report gaps <= deadline (when wake_lead covers WAIT+TRANS)
  PowerAnticipation,     // TRANS entered exactly delta_on before its report
  FifoDeparture,         // FIFO order, serialization time, queue conservation
  TimePartition,         // monotone time, states cover [0, duration] exactly
};

inline constexpr int kRuleCount = 9;

std::string_view rule_id(Rule r);
std::optional<Rule> rule_from_id(std::string_view id);

struct Violation {
  SimTime time{};
  Rule rule{};
  std::string detail;
};

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Streaming checker: feed lines in order, then call finish() once.
class TraceValidator {
 public:
  /// Without a config, the trace's own `# config` header line is used.
  explicit TraceValidator(std::optional<trace::TraceConfig> cfg = std::nullopt);

  /// Throws TraceFormatError on an unreadable line.
  void feed(std::string_view line);
  std::vector<Violation> finish();

  [[nodiscard]] std::uint64_t lines() const { return line_no_; }

 private:
  enum class St : std::uint8_t { Off, Wait, Trans, On };

  void record(SimTime t, std::string_view kind, std::string_view rest);
  void flag(SimTime t, Rule r, std::string detail);
  const trace::TraceConfig& cfg() const;
  std::int64_t cycle_of(SimTime t) const;

  std::optional<trace::TraceConfig> cfg_;
  std::uint64_t line_no_ = 0;
  bool saw_magic_ = false;
  bool ended_ = false;
  std::vector<Violation> out_;

  SimTime last_time_{0};
  St state_ = St::Off;
  SimTime state_since_{0};
  std::int64_t partition_sum_ = 0;
  bool powered_ = false;

  std::optional<SimTime> trans_entered_;
  SimTime last_report_{0};

  std::int64_t report_cycle_ = -1;
  std::int64_t report_bytes_ = 0;
  std::map<std::int64_t, std::int64_t> grants_;
  std::int64_t sent_cycle_ = -1;
  std::int64_t sent_bytes_ = 0;

  struct Pending {
    std::uint64_t id;
    SimTime arrival;
  };
  std::deque<Pending> queue_;
  std::uint64_t next_arrival_id_ = 0;
  std::uint64_t arrivals_ = 0;
  std::uint64_t departures_ = 0;
  SimTime last_departure_{0};
};

std::vector<Violation> validate(std::istream& in, std::optional<trace::TraceConfig> cfg = std::nullopt);
std::vector<Violation> validate_text(std::string_view text, std::optional<trace::TraceConfig> cfg = std::nullopt);

}  // namespace epon::validate
