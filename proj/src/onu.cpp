#include "epon/onu.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace epon::onu {

std::string_view to_string(OnuState s) {
  switch (s) {
    case OnuState::Off: return "OFF";
    case OnuState::Wait: return "WAIT";
    case OnuState::Trans: return "TRANS";
    case OnuState::On: return "ON";
  }
  return "?";
}

OnuState next_state(OnuState s) {
  switch (s) {
    case OnuState::Off: return OnuState::Wait;
    case OnuState::Wait: return OnuState::Trans;
    case OnuState::Trans: return OnuState::On;
    case OnuState::On: return OnuState::Off;
  }
  return OnuState::Off;
}

bool powered(OnuState s) { return s == OnuState::Trans || s == OnuState::On; }

std::string_view to_string(TimerKind k) { return k == TimerKind::PowerOn ? "poweron" : "keepalive"; }

void SleepConfig::validate() const {
  if (q_w < 1) throw std::invalid_argument("onu.q_w must be >= 1");
  if (delta_on < SimTime{0}) throw std::invalid_argument("onu.delta_on_ns must be >= 0");
  if (wake_lead < SimTime{0}) throw std::invalid_argument("onu.wake_lead_ns must be >= 0");
}

SimTime wait_poweron_time(SimTime now, SimTime delta_on, const olt::DbaConfig& dba) {
  const SimTime earliest = now + delta_on;
  std::int64_t k = (earliest.count() + dba.cycle_len.count() - 1) / dba.cycle_len.count();
  // A report slot at `now` itself has already been served by the time a
  // frame arrival or timer runs.
  if (k * dba.cycle_len <= now) ++k;
  return k * dba.cycle_len - delta_on;
}

SimTime keepalive_time(SimTime last_report, SimTime now, const Params& p) {
  return std::max(now, last_report + p.dba.report_deadline - p.sleep.wake_lead);
}

namespace {

void enter(OnuContext& ctx, OnuState s, SimTime now) {
  ctx.state = s;
  ctx.state_entered_at = now;
}

void enter_wait(Outcome& out, SimTime now, const Params& p) {
  enter(out.ctx, OnuState::Wait, now);
  const SimTime at = wait_poweron_time(now, p.sleep.delta_on, p.dba);
  out.ctx.poweron_at = at;
  out.actions.emplace_back(ArmTimer{at, TimerKind::PowerOn});
}

}  // namespace

Outcome start(const Params& p) {
  Outcome out;
  out.actions.emplace_back(ArmTimer{keepalive_time(SimTime{0}, SimTime{0}, p), TimerKind::Keepalive});
  return out;
}

Outcome on_frame_arrival(OnuContext ctx, Frame frame, SimTime now, const Params& p) {
  Outcome out{std::move(ctx), {}};
  out.ctx.queue_bytes += frame.size_bytes;
  out.ctx.queue.push_back(std::move(frame));
  if (out.ctx.state == OnuState::Off && static_cast<std::int64_t>(out.ctx.queue.size()) >= p.sleep.q_w) {
    out.actions.emplace_back(CancelTimer{TimerKind::Keepalive});
    enter_wait(out, now, p);
  }
  return out;
}

Outcome on_keepalive_timer(OnuContext ctx, SimTime now, const Params& p) {
  Outcome out{std::move(ctx), {}};
  if (out.ctx.state != OnuState::Off) return out;
  enter_wait(out, now, p);
  return out;
}

Outcome on_poweron_timer(OnuContext ctx, SimTime now, const Params& p) {
  Outcome out{std::move(ctx), {}};
  if (out.ctx.state != OnuState::Wait) throw std::logic_error("power-on timer outside WAIT");
  out.ctx.poweron_at.reset();
  out.ctx.report_at = now + p.sleep.delta_on;
  enter(out.ctx, OnuState::Trans, now);
  out.actions.emplace_back(PowerOn{});
  return out;
}

Outcome on_cycle_start(OnuContext ctx, SimTime now, const Params&) {
  Outcome out{std::move(ctx), {}};
  if (out.ctx.state == OnuState::Trans && out.ctx.on_at_next_cycle) {
    out.ctx.on_at_next_cycle = false;
    out.ctx.report_at.reset();
    out.ctx.drained = false;
    enter(out.ctx, OnuState::On, now);
  }
  return out;
}

Outcome on_gate(OnuContext ctx, const olt::GateMessage& gate) {
  ctx.last_gate = gate;
  return Outcome{std::move(ctx), {}};
}

Outcome on_report_slot(OnuContext ctx, SimTime now, const Params& p) {
  Outcome out{std::move(ctx), {}};
  OnuContext& c = out.ctx;
  if (!powered(c.state)) {
    throw std::logic_error("report slot offered to an unpowered ONU at " + std::to_string(now.count()) + " ns");
  }
  if (c.state == OnuState::Trans) {
    // The transmitter is still powering up until report_at.
    if (!c.report_at || now < *c.report_at || c.on_at_next_cycle) return out;
  }
  const auto frames = static_cast<std::int64_t>(c.queue.size());
  out.actions.emplace_back(SendReport{c.queue_bytes, frames});
  c.last_report_sent = now;
  if (c.state == OnuState::Trans) {
    c.on_at_next_cycle = true;
    return out;
  }
  if (c.drained) {
    c.drained = false;
    if (should_sleep(frames, p.sleep.q_w)) {
      enter(c, OnuState::Off, now);
      out.actions.emplace_back(PowerOff{});
      out.actions.emplace_back(ArmTimer{keepalive_time(now, now, p), TimerKind::Keepalive});
    }
  }
  return out;
}

Outcome on_data_slot(OnuContext ctx, const olt::GateMessage& gate, SimTime now, const Params& p) {
  Outcome out{std::move(ctx), {}};
  OnuContext& c = out.ctx;
  if (c.state != OnuState::On) throw std::logic_error("data slot outside ON");
  std::int64_t budget = gate.data_grant_bytes;
  TransmitFrames tx;
  SimTime t = now;
  while (!c.queue.empty() && c.queue.front().size_bytes <= budget) {
    Frame f = std::move(c.queue.front());
    c.queue.pop_front();
    budget -= f.size_bytes;
    c.queue_bytes -= f.size_bytes;
    t += olt::transmission_time(f.size_bytes, p.dba.line_rate_bps);
    f.departure = t;
    tx.frames.push_back(std::move(f));
  }
  if (!tx.frames.empty()) out.actions.emplace_back(std::move(tx));
  // A zero grant transmits nothing, but an empty queue still arms the final report.
  if (c.queue.empty()) c.drained = true;
  return out;
}

}  // namespace epon::onu
