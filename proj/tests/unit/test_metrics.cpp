#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "epon/metrics.hpp"

using namespace epon;
using namespace epon::metrics;
using onu::OnuState;

namespace {

constexpr SimTime sec(double s) { return SimTime{static_cast<std::int64_t>(s * 1e9)}; }

MetricsSummary run(double power, double delay_s, std::uint64_t seed) {
  MetricsSummary s;
  s.load = 0.5;
  s.q_w = 10;
  s.seed = seed;
  s.power_pct = power;
  s.mean_delay_s = delay_s;
  s.t_on_s = 50;
  s.t_off_s = 50;
  return s;
}

}  // namespace

TEST_CASE("state-time accumulation") {
  const std::vector<StateChange> tr = {
      {sec(40), OnuState::Off, OnuState::Wait},
      {sec(41), OnuState::Wait, OnuState::Trans},
      {sec(44.5), OnuState::Trans, OnuState::On},
  };
  const StateTimes t = accumulate(tr, sec(100));
  CHECK(t.t_off == sec(40));
  CHECK(t.t_wait == sec(1));
  CHECK(t.t_trans == sec(3.5));
  CHECK(t.t_on == sec(55.5));
  CHECK(t.total() == sec(100));

  const std::vector<StateChange> always_on = {
      {SimTime{0}, OnuState::Off, OnuState::Wait},
      {SimTime{0}, OnuState::Wait, OnuState::Trans},
      {SimTime{0}, OnuState::Trans, OnuState::On},
  };
  const StateTimes on = accumulate(always_on, sec(100));
  CHECK(on.t_on == sec(100));
  CHECK(on.t_off + on.t_wait + on.t_trans == SimTime{0});
}

TEST_CASE("accumulation window") {
  const std::vector<StateChange> tr = {
      {sec(40), OnuState::Off, OnuState::Wait},
      {sec(41), OnuState::Wait, OnuState::Trans},
  };
  const StateTimes t = accumulate(tr, sec(100), sec(40.5));
  CHECK(t.t_wait == sec(0.5));
  CHECK(t.t_trans == sec(59));
  CHECK(t.total() == sec(59.5));
}

TEST_CASE("accumulation rejects malformed transitions") {
  std::vector<StateChange> bad = {{sec(2), OnuState::Off, OnuState::Wait}, {sec(1), OnuState::Wait, OnuState::Trans}};
  CHECK_THROWS_AS(accumulate(bad, sec(10)), std::invalid_argument);
  bad = {{sec(2), OnuState::Wait, OnuState::Trans}};
  CHECK_THROWS_AS(accumulate(bad, sec(10)), std::invalid_argument);
  bad = {{sec(20), OnuState::Off, OnuState::Wait}};
  CHECK_THROWS_AS(accumulate(bad, sec(10)), std::invalid_argument);
}

TEST_CASE("random partitions are exact") {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 200; ++round) {
    std::vector<StateChange> tr;
    OnuState s = OnuState::Off;
    SimTime t{0};
    const SimTime end{1'000'000'000};
    while (true) {
      t += SimTime{static_cast<std::int64_t>(rng() % 50'000'000)};
      if (t > end) break;
      tr.push_back({t, s, onu::next_state(s)});
      s = onu::next_state(s);
    }
    const StateTimes st = accumulate(tr, end);
    REQUIRE(st.total() == end);
  }
}

TEST_CASE("power fraction") {
  const PowerProfile p;
  StateTimes t;
  t.t_on = sec(100);
  CHECK(power_fraction(t, p) == doctest::Approx(100.0));
  t = {};
  t.t_off = sec(100);
  CHECK(power_fraction(t, p) == doctest::Approx(10.0));
  t = {};
  t.t_on = sec(30);
  t.t_trans = sec(20);
  t.t_off = sec(45);
  t.t_wait = sec(5);
  CHECK(power_fraction(t, p) == doctest::Approx(55.0));
  CHECK_THROWS_AS(power_fraction(StateTimes{}, p), std::invalid_argument);
}

TEST_CASE("power fraction grows with powered time") {
  const PowerProfile p;
  double last = 0.0;
  for (int on = 0; on <= 100; ++on) {
    StateTimes t;
    t.t_on = sec(on);
    t.t_off = sec(100 - on);
    const double v = power_fraction(t, p);
    CHECK(v >= last);
    CHECK(v >= 10.0 - 1e-12);
    CHECK(v <= 100.0 + 1e-12);
    last = v;
  }
}

TEST_CASE("ideal curve") {
  const PowerProfile p;
  CHECK(ideal_power_pct(0.0, p) == doctest::Approx(10.0));
  CHECK(ideal_power_pct(0.5, p) == doctest::Approx(55.0));
  CHECK(ideal_power_pct(1.0, p) == doctest::Approx(100.0));
}

TEST_CASE("delay statistics") {
  std::vector<traffic::Frame> one = {{0, 1500, SimTime{0}, sec(0.005)}};
  CHECK(delay_stats(one).mean_s == doctest::Approx(0.005));
  const auto d = delay_stats_ns({1'000'000, 2'000'000, 3'000'000, 4'000'000});
  CHECK(d.mean_s == doctest::Approx(0.0025));
  CHECK(d.p95_s == doctest::Approx(0.004));

  std::vector<std::int64_t> hundred;
  for (int i = 1; i <= 100; ++i) hundred.push_back(i);
  CHECK(delay_stats_ns(hundred).p95_s == doctest::Approx(95e-9));

  std::vector<traffic::Frame> pending = {{0, 1500, SimTime{0}, std::nullopt}};
  CHECK_THROWS_AS(delay_stats(pending), std::invalid_argument);
  CHECK_THROWS_AS(delay_stats_ns({}), std::invalid_argument);
}

TEST_CASE("Student-t critical values") {
  // One degree of freedom is the Cauchy quantile tan(pi * (0.975 - 0.5)).
  CHECK(student_t975(1) == doctest::Approx(std::tan(std::numbers::pi * 0.475)).epsilon(1e-9));
  CHECK(student_t975(1) == doctest::Approx(12.7062).epsilon(1e-5));
  // Two degrees of freedom: q(p) = (2p - 1) * sqrt(2 / (4p(1 - p))).
  const double p = 0.975;
  const double a = 4.0 * p * (1.0 - p);
  CHECK(student_t975(2) == doctest::Approx(2.0 * (p - 0.5) * std::sqrt(2.0 / a)).epsilon(1e-9));
  CHECK(student_t975(9) == doctest::Approx(2.262157).epsilon(1e-6));
  CHECK_THROWS_AS(student_t975(0), std::invalid_argument);
}

TEST_CASE("aggregation") {
  const std::vector<MetricsSummary> runs = {run(54, 0.010, 1), run(56, 0.012, 2)};
  const MetricsSummary a = aggregate(runs);
  CHECK_FALSE(a.seed);
  CHECK(a.power_pct == doctest::Approx(55.0));
  // sd = sqrt(2), n = 2: half-width = t(1) * sqrt(2) / sqrt(2).
  CHECK(*a.ci95_power == doctest::Approx(std::tan(std::numbers::pi * 0.475)));
  CHECK(a.mean_delay_s == doctest::Approx(0.011));
  CHECK(*a.ci95_delay_s == doctest::Approx(std::tan(std::numbers::pi * 0.475) * 0.001));

  std::vector<MetricsSummary> same;
  for (std::uint64_t s = 0; s < 10; ++s) same.push_back(run(40, 0.02, s));
  const MetricsSummary z = aggregate(same);
  CHECK(*z.ci95_power == 0.0);
  CHECK(*z.ci95_delay_s == 0.0);
  CHECK(z.power_pct == doctest::Approx(40.0));

  CHECK_THROWS_AS(aggregate(std::vector<MetricsSummary>{run(1, 1, 1)}), std::invalid_argument);
  auto mixed = runs;
  mixed[1].q_w = 100;
  CHECK_THROWS_AS(aggregate(mixed), std::invalid_argument);
}

TEST_CASE("aggregation does not depend on run order") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(10.0, 100.0);
  std::vector<MetricsSummary> runs;
  for (std::uint64_t s = 0; s < 10; ++s) runs.push_back(run(u(rng), u(rng) * 1e-4, s));
  const MetricsSummary ref = aggregate(runs);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(runs.begin(), runs.end(), rng);
    const MetricsSummary a = aggregate(runs);
    CHECK(a.power_pct == ref.power_pct);
    CHECK(*a.ci95_power == *ref.ci95_power);
    CHECK(a.mean_delay_s == ref.mean_delay_s);
  }
}
