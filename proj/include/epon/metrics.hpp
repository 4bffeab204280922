#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "epon/onu.hpp"
#include "epon/sim_core.hpp"
#include "epon/traffic.hpp"

namespace epon::metrics {

struct PowerProfile {
  double p_on = 1.0;   // ON and TRANS
  double p_off = 0.1;  // OFF and WAIT

  void validate() const;
};

struct StateTimes {
  SimTime t_off{0};
  SimTime t_wait{0};
  SimTime t_trans{0};
  SimTime t_on{0};

  [[nodiscard]] SimTime total() const { return t_off + t_wait + t_trans + t_on; }
  [[nodiscard]] SimTime& operator[](onu::OnuState s);
};

struct StateChange {
  SimTime time{};
  onu::OnuState from{};
  onu::OnuState to{};
};

/// Time spent in each state over [window_start, window_end], for a run that
/// starts OFF at t=0. Throws std::invalid_argument on out-of-order or
/// discontinuous transitions.
StateTimes accumulate(std::span<const StateChange> transitions, SimTime window_end,
                      SimTime window_start = SimTime{0});

/// Percent of the always-on consumption.
double power_fraction(const StateTimes& times, const PowerProfile& profile);

/// Ideal mechanism: asleep exactly when idle.
double ideal_power_pct(double load, const PowerProfile& profile);

struct DelayStats {
  double mean_s = 0.0;
  double p95_s = 0.0;
};

/// Arrival-to-end-of-transmission delays; p95 by nearest rank.
/// Throws std::invalid_argument on an empty set or a pending departure.
DelayStats delay_stats(std::span<const traffic::Frame> frames);
DelayStats delay_stats_ns(std::vector<std::int64_t> delays_ns);

struct MetricsSummary {
  double load = 0.0;
  std::int64_t q_w = 0;
  std::optional<std::uint64_t> seed;  // empty for an aggregate
  double t_off_s = 0, t_wait_s = 0, t_trans_s = 0, t_on_s = 0;
  double power_pct = 0.0;
  double mean_delay_s = 0.0;
  double p95_delay_s = 0.0;
  double frames_in = 0, frames_out = 0;
  std::optional<double> ci95_power;
  std::optional<double> ci95_delay_s;

  [[nodiscard]] double total_s() const { return t_off_s + t_wait_s + t_trans_s + t_on_s; }
};

/// Mean over seeds with Student-t 95% half-widths for power and mean delay.
/// Requires >= 2 runs sharing (load, q_w).
MetricsSummary aggregate(std::span<const MetricsSummary> runs);

/// Two-sided 95% Student-t critical value.
double student_t975(std::int64_t dof);

}  // namespace epon::metrics
