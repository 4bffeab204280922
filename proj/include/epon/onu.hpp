#pragma once

// Upstream packet-coalescing automaton of a sleep-capable ONU.
//
//   OFF --(q >= q_w or keepalive)--> WAIT --(power-on instant)--> TRANS
//   TRANS --(report sent, next cycle starts)--> ON
//   ON --(final report after draining, q < q_w)--> OFF
//
// Every handler is a pure function of (context, event, config): it takes the
// context by value and returns the successor context together with the side
// effects the driver has to perform, in order.

#include <cstdint>
#include <deque>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "epon/olt.hpp"
#include "epon/sim_core.hpp"
#include "epon/traffic.hpp"

namespace epon::onu {

using traffic::Frame;

enum class OnuState : std::uint8_t { Off, Wait, Trans, On };

std::string_view to_string(OnuState s);
/// Successor of `s` in the OFF -> WAIT -> TRANS -> ON -> OFF cycle.
OnuState next_state(OnuState s);
/// Transmitter is powered in TRANS and ON only.
bool powered(OnuState s);

struct SleepConfig {
  std::int64_t q_w = 10;                 // wake threshold, frames
  SimTime delta_on{2'000'000};           // transmitter power-up latency
  SimTime wake_lead{3'500'000};          // keepalive fires this long before the report deadline

  void validate() const;
};

enum class TimerKind : std::uint8_t { PowerOn, Keepalive };
std::string_view to_string(TimerKind k);

struct PowerOn {};
struct PowerOff {};
struct SendReport {
  std::int64_t queue_bytes = 0;
  std::int64_t queue_frames = 0;
};
struct TransmitFrames {
  std::vector<Frame> frames;  // departures filled in
};
struct ArmTimer {
  SimTime at{};
  TimerKind kind{};
};
struct CancelTimer {
  TimerKind kind{};
};
using Action = std::variant<PowerOn, PowerOff, SendReport, TransmitFrames, ArmTimer, CancelTimer>;

struct OnuContext {
  OnuState state = OnuState::Off;
  std::deque<Frame> queue;
  std::int64_t queue_bytes = 0;
  SimTime last_report_sent{0};
  std::optional<olt::GateMessage> last_gate;
  std::optional<SimTime> poweron_at;  // armed power-on instant while in WAIT
  std::optional<SimTime> report_at;   // report the warming transmitter is aligned to
  SimTime state_entered_at{0};
  bool drained = false;               // a data slot emptied the queue; next report is the final one
  bool on_at_next_cycle = false;      // TRANS report sent; ON at the next cycle start
};

struct Outcome {
  OnuContext ctx;
  std::vector<Action> actions;
};

struct Params {
  SleepConfig sleep;
  olt::DbaConfig dba;
};

/// Power-on instant for a WAIT entered at `now`: delta_on before the first
/// report slot (cycle start) that is at least delta_on away and still ahead
/// of `now`.
SimTime wait_poweron_time(SimTime now, SimTime delta_on, const olt::DbaConfig& dba);

/// Sleep decision taken right after the final report.
constexpr bool should_sleep(std::int64_t queue_frames, std::int64_t q_w) { return queue_frames < q_w; }

/// Keepalive instant for a sleep period that began after a report at `last_report`.
SimTime keepalive_time(SimTime last_report, SimTime now, const Params& p);

/// Initial context (OFF, empty queue) plus its keepalive timer.
Outcome start(const Params& p);

Outcome on_frame_arrival(OnuContext ctx, Frame frame, SimTime now, const Params& p);
Outcome on_poweron_timer(OnuContext ctx, SimTime now, const Params& p);
Outcome on_keepalive_timer(OnuContext ctx, SimTime now, const Params& p);
Outcome on_cycle_start(OnuContext ctx, SimTime now, const Params& p);
Outcome on_gate(OnuContext ctx, const olt::GateMessage& gate);
/// Throws std::logic_error in OFF or WAIT: the driver must not offer a
/// report slot to an unpowered transmitter.
Outcome on_report_slot(OnuContext ctx, SimTime now, const Params& p);
Outcome on_data_slot(OnuContext ctx, const olt::GateMessage& gate, SimTime now, const Params& p);

}  // namespace epon::onu
