#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>

#include "epon/sim_core.hpp"

namespace epon::traffic {

struct TrafficConfig {
  double alpha = 2.5;
  std::int64_t frame_bytes = 1500;
  double load = 0.5;
  double rate_bps = 200e6;  // available upstream bandwidth the load refers to
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct Frame {
  std::uint64_t id = 0;
  std::int64_t size_bytes = 0;
  SimTime arrival{};
  std::optional<SimTime> departure;
};

/// Pareto scale x_m (ns) whose mean interarrival alpha*x_m/(alpha-1) carries
/// `load * rate_bps` worth of `frame_bytes` frames. Rejects alpha <= 1.
double calibrate_scale(double alpha, std::int64_t frame_bytes, double load, double rate_bps);
double calibrate_scale(const TrafficConfig& cfg);

/// 64-bit generator used for every run: std::mt19937_64 (bit-exact by the
/// standard) with uniforms taken from its top 53 bits.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1].
  double uniform01() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Inverse-CDF Pareto sample x_m * u^(-1/alpha), rounded to the nearest ns.
SimTime pareto_from_uniform(double x_m_ns, double alpha, double u);
SimTime next_interarrival(double x_m_ns, double alpha, Rng& rng);

/// splitmix64 finaliser; used to derive independent per-run streams.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_stream_seed(std::uint64_t base_seed, double load);

/// Self-rescheduling arrival process bound to an engine.
class Source {
 public:
  using Sink = std::function<void(const Frame&)>;

  Source(const TrafficConfig& cfg, sim::Engine& engine, Sink sink);
  Source(const Source&) = delete;
  Source& operator=(const Source&) = delete;

  [[nodiscard]] std::uint64_t generated() const { return next_id_; }
  [[nodiscard]] double scale_ns() const { return x_m_; }

 private:
  void arm();

  TrafficConfig cfg_;
  sim::Engine& engine_;
  Sink sink_;
  Rng rng_;
  double x_m_;
  std::uint64_t next_id_ = 0;
};

/// Schedules the first arrival; every arrival schedules the next one.
/// The engine must still be at t=0.
std::unique_ptr<Source> install(const TrafficConfig& cfg, sim::Engine& engine, Source::Sink sink);

}  // namespace epon::traffic
