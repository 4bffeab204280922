#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "epon/traffic.hpp"

using namespace epon;
using namespace epon::traffic;

namespace {

// Mean interarrival (ns) of fixed-size frames that fill `load` of `rate`.
double mean_gap_ns(double bytes, double load, double rate) { return bytes * 8.0 / (load * rate) * 1e9; }

std::uint64_t frames_in(double load, SimTime horizon, std::uint64_t seed) {
  TrafficConfig cfg;
  cfg.load = load;
  cfg.seed = seed;
  sim::Engine engine;
  std::uint64_t n = 0;
  auto src = install(cfg, engine, [&](const Frame&) { ++n; });
  engine.run_until(horizon);
  return n;
}

}  // namespace

TEST_CASE("scale calibration") {
  // 1500 B at half of 200 Mb/s: one frame every 120 us on average.
  CHECK(mean_gap_ns(1500, 0.5, 200e6) == doctest::Approx(120'000.0));
  CHECK(calibrate_scale(2.5, 1500, 0.5, 200e6) == doctest::Approx(72'000.0));
  CHECK(calibrate_scale(2.5, 1500, 1.0, 200e6) == doctest::Approx(36'000.0));
  for (double alpha : {1.2, 2.0, 2.5, 4.0}) {
    const double mean = mean_gap_ns(1500, 0.3, 200e6);
    const double xm = calibrate_scale(alpha, 1500, 0.3, 200e6);
    CHECK(alpha * xm / (alpha - 1.0) == doctest::Approx(mean).epsilon(1e-12));
  }
  CHECK_THROWS_AS(calibrate_scale(1.0, 1500, 0.5, 200e6), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_scale(0.5, 1500, 0.5, 200e6), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_scale(2.5, 1500, 0.0, 200e6), std::invalid_argument);
}

TEST_CASE("inverse-CDF samples") {
  CHECK(pareto_from_uniform(36'000.0, 2.5, 1.0) == SimTime{36'000});
  CHECK(pareto_from_uniform(72'000.0, 2.5, 1.0) == SimTime{72'000});
  const auto expected = std::llround(36'000.0 * std::exp2(0.4));
  CHECK(expected == 47'502);
  CHECK(pareto_from_uniform(36'000.0, 2.5, 0.5) == SimTime{expected});
}

TEST_CASE("uniform draws stay in (0, 1]") {
  Rng rng(3);
  for (int i = 0; i < 100'000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
  }
}

TEST_CASE("samples respect the Pareto support and mean") {
  Rng rng(12345);
  const double xm = 72'000.0;
  const double target = 2.5 * xm / 1.5;
  double total = 0.0;
  double batch = 0.0;
  constexpr int n = 1'000'000;
  constexpr int batch_size = 100'000;
  for (int i = 1; i <= n; ++i) {
    const SimTime s = next_interarrival(xm, 2.5, rng);
    REQUIRE(s >= SimTime{72'000});
    total += static_cast<double>(s.count());
    batch += static_cast<double>(s.count());
    if (i % batch_size == 0) {
      CHECK(batch / batch_size == doctest::Approx(target).epsilon(0.05));
      batch = 0.0;
    }
  }
  CHECK(total / n == doctest::Approx(120'000.0).epsilon(0.01));
}

TEST_CASE("frame counts over 100 s") {
  const SimTime horizon{100'000'000'000};
  CHECK(static_cast<double>(frames_in(0.5, horizon, 1)) == doctest::Approx(833'333.0).epsilon(0.02));
  CHECK(static_cast<double>(frames_in(0.05, horizon, 1)) == doctest::Approx(83'333.0).epsilon(0.02));
}

TEST_CASE("a source replays identically from the same seed") {
  auto arrivals = [](std::uint64_t seed) {
    TrafficConfig cfg;
    cfg.seed = seed;
    sim::Engine engine;
    std::vector<SimTime> at;
    auto src = install(cfg, engine, [&](const Frame& f) {
      CHECK(f.id == at.size());
      CHECK(f.size_bytes == 1500);
      at.push_back(f.arrival);
    });
    engine.run_until(SimTime{50'000'000});
    return at;
  };
  CHECK(arrivals(9) == arrivals(9));
  CHECK(arrivals(9) != arrivals(10));
}

TEST_CASE("stream derivation") {
  CHECK(derive_stream_seed(1, 0.5) == derive_stream_seed(1, 0.5));
  CHECK(derive_stream_seed(1, 0.5) != derive_stream_seed(2, 0.5));
  CHECK(derive_stream_seed(1, 0.5) != derive_stream_seed(1, 0.55));
  CHECK(mix64(0) != 0);
}

TEST_CASE("configuration checks") {
  TrafficConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.load = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.frame_bytes = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  sim::Engine engine;
  engine.run_until(SimTime{1});
  CHECK_THROWS_AS(install(TrafficConfig{}, engine, [](const Frame&) {}), std::logic_error);
}
