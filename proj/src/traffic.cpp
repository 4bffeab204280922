#include "epon/traffic.hpp"

#include <bit>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace epon::traffic {

void TrafficConfig::validate() const {
  if (!(alpha > 1.0)) throw std::invalid_argument("traffic.alpha must be > 1 (finite mean)");
  if (frame_bytes <= 0) throw std::invalid_argument("traffic.frame_bytes must be > 0");
  if (!(load > 0.0 && load < 1.0)) throw std::invalid_argument("traffic.load must lie in (0, 1)");
  if (!(rate_bps > 0.0)) throw std::invalid_argument("traffic.rate_bps must be > 0");
}

double calibrate_scale(double alpha, std::int64_t frame_bytes, double load, double rate_bps) {
  if (!(alpha > 1.0)) throw std::invalid_argument("Pareto alpha must be > 1 for a finite mean");
  if (frame_bytes <= 0 || !(load > 0.0) || !(rate_bps > 0.0)) {
    throw std::invalid_argument("frame size, load and rate must be positive");
  }
  const double mean_ns = static_cast<double>(frame_bytes) * 8.0 / (load * rate_bps) * 1e9;
  return mean_ns * (alpha - 1.0) / alpha;
}

double calibrate_scale(const TrafficConfig& cfg) {
  return calibrate_scale(cfg.alpha, cfg.frame_bytes, cfg.load, cfg.rate_bps);
}

SimTime pareto_from_uniform(double x_m_ns, double alpha, double u) {
  return SimTime{std::llround(x_m_ns * std::pow(u, -1.0 / alpha))};
}

SimTime next_interarrival(double x_m_ns, double alpha, Rng& rng) {
  return pareto_from_uniform(x_m_ns, alpha, rng.uniform01());
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t base_seed, double load) {
  return mix64(mix64(base_seed) ^ std::bit_cast<std::uint64_t>(load));
}

Source::Source(const TrafficConfig& cfg, sim::Engine& engine, Sink sink)
    : cfg_(cfg), engine_(engine), sink_(std::move(sink)), rng_(cfg.seed), x_m_(calibrate_scale(cfg)) {
  arm();
}

void Source::arm() {
  const SimTime at = engine_.now() + next_interarrival(x_m_, cfg_.alpha, rng_);
  engine_.schedule(at, sim::EventClass::FrameArrival, [this, at] {
    Frame f{next_id_++, cfg_.frame_bytes, at, std::nullopt};
    arm();
    sink_(f);
  });
}

std::unique_ptr<Source> install(const TrafficConfig& cfg, sim::Engine& engine, Source::Sink sink) {
  cfg.validate();
  if (engine.now() != SimTime{0}) throw std::logic_error("traffic source must be installed at t=0");
  return std::make_unique<Source>(cfg, engine, std::move(sink));
}

}  // namespace epon::traffic
