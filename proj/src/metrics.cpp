#include "epon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace epon::metrics {

void PowerProfile::validate() const {
  if (!(p_off > 0.0) || !(p_on > p_off)) throw std::invalid_argument("power profile requires p_on > p_off > 0");
}

SimTime& StateTimes::operator[](onu::OnuState s) {
  switch (s) {
    case onu::OnuState::Off: return t_off;
    case onu::OnuState::Wait: return t_wait;
    case onu::OnuState::Trans: return t_trans;
    case onu::OnuState::On: return t_on;
  }
  return t_off;
}

StateTimes accumulate(std::span<const StateChange> transitions, SimTime window_end, SimTime window_start) {
  if (window_start < SimTime{0} || window_end < window_start) throw std::invalid_argument("bad accounting window");
  StateTimes times;
  onu::OnuState current = onu::OnuState::Off;
  SimTime since{0};
  auto credit = [&](SimTime until) {
    const SimTime a = std::max(since, window_start);
    const SimTime b = std::min(until, window_end);
    if (b > a) times[current] += b - a;
  };
  for (const StateChange& c : transitions) {
    if (c.time < since) throw std::invalid_argument("state transitions out of order");
    if (c.from != current) throw std::invalid_argument("state transition does not start from the current state");
    if (c.time > window_end) throw std::invalid_argument("state transition after the end of the trace");
    credit(c.time);
    current = c.to;
    since = c.time;
  }
  credit(window_end);
  return times;
}

double power_fraction(const StateTimes& times, const PowerProfile& profile) {
  const double total = static_cast<double>(times.total().count());
  if (total <= 0.0) throw std::invalid_argument("power_fraction over an empty interval");
  const double hi = static_cast<double>((times.t_on + times.t_trans).count());
  const double lo = static_cast<double>((times.t_off + times.t_wait).count());
  return 100.0 * (hi * profile.p_on + lo * profile.p_off) / (total * profile.p_on);
}

double ideal_power_pct(double load, const PowerProfile& profile) {
  const double floor_pct = 100.0 * profile.p_off / profile.p_on;
  return floor_pct + (100.0 - floor_pct) * load;
}

DelayStats delay_stats_ns(std::vector<std::int64_t> delays) {
  if (delays.empty()) throw std::invalid_argument("delay statistics of an empty frame set");
  const long double sum = std::accumulate(delays.begin(), delays.end(), 0.0L);
  DelayStats s;
  s.mean_s = static_cast<double>(sum / static_cast<long double>(delays.size())) * 1e-9;
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(delays.size())));
  auto nth = delays.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(rank, 1) - 1);
  std::nth_element(delays.begin(), nth, delays.end());
  s.p95_s = static_cast<double>(*nth) * 1e-9;
  return s;
}

DelayStats delay_stats(std::span<const traffic::Frame> frames) {
  std::vector<std::int64_t> delays;
  delays.reserve(frames.size());
  for (const auto& f : frames) {
    if (!f.departure) throw std::invalid_argument("delay statistics over a frame that has not departed");
    delays.push_back((*f.departure - f.arrival).count());
  }
  return delay_stats_ns(std::move(delays));
}

double student_t975(std::int64_t dof) {
  if (dof < 1) throw std::invalid_argument("Student-t needs at least one degree of freedom");
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.975);
}

namespace {

struct MeanCi {
  double mean;
  double half_width;
};

MeanCi mean_ci(std::span<const MetricsSummary> runs, double MetricsSummary::*field) {
  const auto n = static_cast<double>(runs.size());
  double mean = 0.0;
  for (const auto& r : runs) mean += r.*field;
  mean /= n;
  // Identical samples have zero spread; the rounded mean must not invent one.
  const bool constant = std::all_of(runs.begin(), runs.end(), [&](const auto& r) { return r.*field == runs.front().*field; });
  if (constant) return {runs.front().*field, 0.0};
  double ss = 0.0;
  for (const auto& r : runs) ss += (r.*field - mean) * (r.*field - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, student_t975(static_cast<std::int64_t>(runs.size()) - 1) * sd / std::sqrt(n)};
}

}  // namespace

MetricsSummary aggregate(std::span<const MetricsSummary> runs) {
  if (runs.size() < 2) throw std::invalid_argument("aggregation needs at least two runs");
  for (const auto& r : runs) {
    if (r.load != runs.front().load || r.q_w != runs.front().q_w) {
      throw std::invalid_argument("aggregation over mixed (load, q_w) configurations");
    }
  }
  // Sorted copy: the mean does not depend on the order runs were collected in.
  std::vector<MetricsSummary> sorted(runs.begin(), runs.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.seed.value_or(0) < b.seed.value_or(0); });
  MetricsSummary out;
  out.load = runs.front().load;
  out.q_w = runs.front().q_w;
  out.t_off_s = mean_ci(sorted, &MetricsSummary::t_off_s).mean;
  out.t_wait_s = mean_ci(sorted, &MetricsSummary::t_wait_s).mean;
  out.t_trans_s = mean_ci(sorted, &MetricsSummary::t_trans_s).mean;
  out.t_on_s = mean_ci(sorted, &MetricsSummary::t_on_s).mean;
  out.frames_in = mean_ci(sorted, &MetricsSummary::frames_in).mean;
  out.frames_out = mean_ci(sorted, &MetricsSummary::frames_out).mean;
  out.p95_delay_s = mean_ci(sorted, &MetricsSummary::p95_delay_s).mean;
  const MeanCi power = mean_ci(sorted, &MetricsSummary::power_pct);
  const MeanCi delay = mean_ci(sorted, &MetricsSummary::mean_delay_s);
  out.power_pct = power.mean;
  out.ci95_power = power.half_width;
  out.mean_delay_s = delay.mean;
  out.ci95_delay_s = delay.half_width;
  return out;
}

}  // namespace epon::metrics
