#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epon/metrics.hpp"
#include "epon/olt.hpp"
#include "epon/onu.hpp"
#include "epon/trace.hpp"
#include "epon/traffic.hpp"

namespace epon {

struct SimulationConfig {
  olt::DbaConfig dba;
  onu::SleepConfig sleep;
  traffic::TrafficConfig traffic;
  metrics::PowerProfile power;
  SimTime duration{100'000'000'000};
  SimTime warmup{0};  // excluded from state times and delays

  void validate() const;
  [[nodiscard]] trace::TraceConfig trace_config() const;
};

struct RunResult {
  metrics::StateTimes times;
  std::vector<metrics::StateChange> transitions;
  std::vector<std::int64_t> delays_ns;  // frames that arrived after warm-up and departed
  std::uint64_t frames_in = 0;
  std::uint64_t frames_out = 0;
  std::int64_t final_queue_frames = 0;
  std::uint64_t delivered_bytes = 0;   // over the whole run
  std::vector<std::string> protocol_violations;  // OLT-side findings
  std::uint64_t events = 0;
};

/// One tagged ONU under a fixed-cycle OLT, started OFF with an empty queue.
/// The traffic seed is taken from cfg.traffic.seed as is.
RunResult simulate(const SimulationConfig& cfg, trace::TraceWriter* trace = nullptr);

metrics::MetricsSummary summarize(const SimulationConfig& cfg, const RunResult& run, std::uint64_t seed);

}  // namespace epon
