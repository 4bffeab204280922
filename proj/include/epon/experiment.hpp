#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "epon/metrics.hpp"
#include "epon/simulation.hpp"
#include "epon/validate.hpp"

namespace epon::experiment {

/// Bad configuration; the message starts with the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentPlan {
  std::vector<double> loads{0.5};
  std::vector<std::int64_t> q_ws{10};
  std::vector<std::uint64_t> seeds;  // consecutive from traffic.seed
  SimulationConfig base;             // load and q_w are overridden per run

  void validate() const;
  [[nodiscard]] std::size_t run_count() const { return loads.size() * q_ws.size() * seeds.size(); }
  /// Concrete configuration of one sweep point; the traffic stream is
  /// derived from (seed, load) only.
  [[nodiscard]] SimulationConfig run_config(double load, std::int64_t q_w, std::uint64_t seed) const;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Keys known to the parser, in documentation order.
const std::vector<std::string>& known_keys();

/// Flat `key = value` text with `#` comments, then `overrides` applied in
/// order. Unknown keys, malformed values and out-of-range parameters throw
/// ConfigError naming the key.
ExperimentPlan parse_config(std::istream& text, const Overrides& overrides = {});
ExperimentPlan parse_config(const Overrides& overrides = {});
ExperimentPlan parse_config_file(const std::filesystem::path& path, const Overrides& overrides = {});

struct RunOptions {
  std::optional<std::filesystem::path> trace_dir;
  bool validate = false;
  unsigned jobs = 1;
};

struct RunRecord {
  metrics::MetricsSummary summary;
  std::int64_t final_queue_frames = 0;
  std::uint64_t delivered_bytes = 0;
  std::uint64_t trace_lines = 0;        // when validated
  std::vector<validate::Violation> violations;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;                    // sweep order: load, q_w, seed
  std::vector<metrics::MetricsSummary> aggregates;  // one per (load, q_w) when >= 2 seeds
};

/// Thrown by run_experiment when validation is on and a trace fails.
class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs one sweep point, optionally streaming its trace through the checker.
RunRecord run_one(const SimulationConfig& cfg, std::uint64_t seed, const RunOptions& options);

ExperimentResult run_experiment(const ExperimentPlan& plan, const RunOptions& options = {});

inline constexpr std::string_view kCsvHeader =
    "load,q_w,seed,t_off_s,t_wait_s,t_trans_s,t_on_s,power_pct,mean_delay_ms,p95_delay_ms,frames_in,frames_out,"
    "ci95_power,ci95_delay";

std::string csv_row(const metrics::MetricsSummary& s);
/// Header plus, per (load, q_w), its seed rows followed by the aggregate row.
void write_csv(std::ostream& os, const ExperimentResult& result);

/// Writes fig3_state_fractions.tsv, fig4_power.tsv and fig5_delay.tsv into
/// `dir` from a results CSV. Throws ConfigError when columns are missing.
void emit_plotdata(std::istream& csv, const std::filesystem::path& dir,
                   const metrics::PowerProfile& profile = {});

std::string trace_file_name(double load, std::int64_t q_w, std::uint64_t seed);

}  // namespace epon::experiment
