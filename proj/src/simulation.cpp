#include "epon/simulation.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <type_traits>

#include <fmt/format.h>

namespace epon {

void SimulationConfig::validate() const {
  dba.validate();
  sleep.validate();
  traffic.validate();
  power.validate();
  if (duration <= SimTime{0}) throw std::invalid_argument("run.duration_s must be > 0");
  if (warmup < SimTime{0} || warmup >= duration) throw std::invalid_argument("run.warmup_ns must lie in [0, duration)");
}

trace::TraceConfig SimulationConfig::trace_config() const {
  trace::TraceConfig t;
  t.cycle_len = dba.cycle_len;
  t.cap_bytes = dba.cap_bytes;
  t.report_duration = dba.report_duration;
  t.report_deadline = dba.report_deadline;
  t.q_w = sleep.q_w;
  t.delta_on = sleep.delta_on;
  t.wake_lead = sleep.wake_lead;
  t.frame_bytes = traffic.frame_bytes;
  t.line_rate_bps = dba.line_rate_bps;
  t.duration = duration;
  return t;
}

namespace {

class Run {
 public:
  Run(const SimulationConfig& cfg, trace::TraceWriter* tw)
      : cfg_(cfg), params_{cfg.sleep, cfg.dba}, olt_(cfg.dba), tw_(tw) {}

  RunResult execute() {
    if (tw_) tw_->header(cfg_.trace_config());
    apply(ctx_.state, onu::start(params_));
    engine_.schedule(SimTime{0}, sim::EventClass::CycleBoundary, [this] { on_cycle(0); });
    engine_.schedule(SimTime{0}, sim::EventClass::GateDelivery, [this] { on_gate(0); });
    source_ = traffic::install(cfg_.traffic, engine_, [this](const traffic::Frame& f) { on_arrival(f); });

    engine_.run_until(cfg_.duration);

    result_.final_queue_frames = static_cast<std::int64_t>(ctx_.queue.size());
    result_.events = engine_.executed();
    if (tw_) tw_->end(cfg_.duration, result_.final_queue_frames, result_.frames_in, result_.frames_out);
    result_.times = metrics::accumulate(result_.transitions, cfg_.duration, cfg_.warmup);
    return std::move(result_);
  }

 private:
  SimTime now() const { return engine_.now(); }

  void on_cycle(std::int64_t k) {
    if (tw_) tw_->cycle(now(), k);
    if (olt_.watchdog_check(now()) == olt::LinkStatus::Disconnected && flagged_silence_ != olt_.last_report_at()) {
      flagged_silence_ = olt_.last_report_at();
      protocol_violation("disconnect", fmt::format("no report since {} ns", olt_.last_report_at().count()));
    }
    step([&](onu::OnuContext c) { return onu::on_cycle_start(std::move(c), now(), params_); });
    const SimTime next = olt_.cycle_start(k + 1);
    engine_.schedule(now() + cfg_.dba.cycle_len / 2, sim::EventClass::GateDelivery, [this, k] { on_gate(k + 1); });
    engine_.schedule(next, sim::EventClass::CycleBoundary, [this, k] { on_cycle(k + 1); });
  }

  void on_gate(std::int64_t k) {
    const olt::GateMessage gate = olt_.issue_gate(k);
    if (tw_) tw_->gate(now(), gate);
    step([&](onu::OnuContext c) { return onu::on_gate(std::move(c), gate); });
    engine_.schedule(gate.report_time, sim::EventClass::ReportSlot, [this] { on_report_slot(); });
    engine_.schedule(gate.data_slot_start, sim::EventClass::DataSlot, [this, gate] { on_data_slot(gate); });
  }

  void on_report_slot() {
    // With delta_on == 0 the power-on instant coincides with the report slot
    // and its timer would otherwise run after the slot has passed.
    if (ctx_.state == onu::OnuState::Wait && ctx_.poweron_at && *ctx_.poweron_at <= now()) {
      engine_.cancel(poweron_timer_);
      if (tw_) tw_->timer(now(), onu::TimerKind::PowerOn);
      step([&](onu::OnuContext c) { return onu::on_poweron_timer(std::move(c), now(), params_); });
    }
    if (onu::powered(ctx_.state)) step([&](onu::OnuContext c) { return onu::on_report_slot(std::move(c), now(), params_); });
  }

  void on_data_slot(const olt::GateMessage& gate) {
    if (ctx_.state == onu::OnuState::On) step([&](onu::OnuContext c) { return onu::on_data_slot(std::move(c), gate, now(), params_); });
  }

  void on_arrival(const traffic::Frame& f) {
    ++result_.frames_in;
    if (tw_) tw_->arrival(now(), f.id, static_cast<std::int64_t>(ctx_.queue.size()) + 1);
    step([&](onu::OnuContext c) { return onu::on_frame_arrival(std::move(c), f, now(), params_); });
  }

  void on_timer(onu::TimerKind kind) {
    if (tw_) tw_->timer(now(), kind);
    if (kind == onu::TimerKind::PowerOn) {
      step([&](onu::OnuContext c) { return onu::on_poweron_timer(std::move(c), now(), params_); });
    } else {
      step([&](onu::OnuContext c) { return onu::on_keepalive_timer(std::move(c), now(), params_); });
    }
  }

  void protocol_violation(std::string_view rule, const std::string& detail) {
    if (tw_) tw_->violation(now(), rule, detail);
    result_.protocol_violations.push_back(fmt::format("{} {} {}", now().count(), rule, detail));
  }

  sim::EventHandle& timer_handle(onu::TimerKind kind) {
    return kind == onu::TimerKind::PowerOn ? poweron_timer_ : keepalive_timer_;
  }

  // Runs one automaton handler on the current context and applies its outcome.
  template <typename Handler>
  void step(Handler&& handler) {
    const onu::OnuState before = ctx_.state;
    apply(before, handler(std::move(ctx_)));
  }

  void apply(onu::OnuState before, onu::Outcome out) {
    ctx_ = std::move(out.ctx);
    for (auto& action : out.actions) {
      std::visit(
          [this](auto& a) {
            using A = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<A, onu::PowerOn>) {
              if (tw_) tw_->power(now(), true);
            } else if constexpr (std::is_same_v<A, onu::PowerOff>) {
              if (tw_) tw_->power(now(), false);
            } else if constexpr (std::is_same_v<A, onu::SendReport>) {
              if (tw_) tw_->report(now(), a.queue_bytes, a.queue_frames);
              if (auto v = olt_.on_report(olt::ReportMessage{now(), a.queue_bytes}, now())) {
                protocol_violation("slot", *v);
              }
            } else if constexpr (std::is_same_v<A, onu::TransmitFrames>) {
              for (const auto& f : a.frames) {
                if (tw_) tw_->tx(now(), f);
                ++result_.frames_out;
                result_.delivered_bytes += static_cast<std::uint64_t>(f.size_bytes);
                if (f.arrival >= cfg_.warmup) result_.delays_ns.push_back((*f.departure - f.arrival).count());
              }
            } else if constexpr (std::is_same_v<A, onu::ArmTimer>) {
              const onu::TimerKind kind = a.kind;
              engine_.cancel(timer_handle(kind));
              timer_handle(kind) =
                  engine_.schedule(a.at, sim::EventClass::Timer, [this, kind] { on_timer(kind); });
            } else if constexpr (std::is_same_v<A, onu::CancelTimer>) {
              engine_.cancel(timer_handle(a.kind));
            }
          },
          action);
    }
    if (ctx_.state != before) {
      result_.transitions.push_back({now(), before, ctx_.state});
      if (tw_) tw_->state(now(), before, ctx_.state);
    }
  }

  SimulationConfig cfg_;
  onu::Params params_;
  sim::Engine engine_;
  olt::Olt olt_;
  onu::OnuContext ctx_;
  trace::TraceWriter* tw_;
  std::unique_ptr<traffic::Source> source_;
  sim::EventHandle poweron_timer_;
  sim::EventHandle keepalive_timer_;
  SimTime flagged_silence_{-1};
  RunResult result_;
};

}  // namespace

RunResult simulate(const SimulationConfig& cfg, trace::TraceWriter* trace) {
  cfg.validate();
  return Run(cfg, trace).execute();
}

metrics::MetricsSummary summarize(const SimulationConfig& cfg, const RunResult& run, std::uint64_t seed) {
  metrics::MetricsSummary s;
  s.load = cfg.traffic.load;
  s.q_w = cfg.sleep.q_w;
  s.seed = seed;
  auto secs = [](SimTime t) { return static_cast<double>(t.count()) * 1e-9; };
  s.t_off_s = secs(run.times.t_off);
  s.t_wait_s = secs(run.times.t_wait);
  s.t_trans_s = secs(run.times.t_trans);
  s.t_on_s = secs(run.times.t_on);
  s.power_pct = metrics::power_fraction(run.times, cfg.power);
  if (run.delays_ns.empty()) {
    s.mean_delay_s = s.p95_delay_s = std::numeric_limits<double>::quiet_NaN();
  } else {
    const auto d = metrics::delay_stats_ns(run.delays_ns);
    s.mean_delay_s = d.mean_s;
    s.p95_delay_s = d.p95_s;
  }
  s.frames_in = static_cast<double>(run.frames_in);
  s.frames_out = static_cast<double>(run.frames_out);
  return s;
}

}  // namespace epon
