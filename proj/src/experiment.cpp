#include "epon/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace epon::experiment {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(x)) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
  }
  return x;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, v));
  }
  return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError(fmt::format("{}: '{}' is not an unsigned integer", key, v));
  }
  return x;
}

// Snap to 1e-9 so that "0.05:0.9:0.05" yields the same doubles as typing
// the values out.
double snap(double x) { return std::round(x * 1e9) / 1e9; }

/// Either a comma list or an inclusive `start:stop:step` range.
std::vector<double> parse_load_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (v.find(':') != std::string::npos) {
    const auto parts = split(v, ':');
    if (parts.size() != 3) throw ConfigError(fmt::format("{}: range must be start:stop:step", key));
    const double a = to_double(key, parts[0]);
    const double b = to_double(key, parts[1]);
    const double step = to_double(key, parts[2]);
    if (!(step > 0.0) || b < a) throw ConfigError(fmt::format("{}: empty or invalid range '{}'", key, v));
    const auto n = static_cast<std::int64_t>(std::floor((b - a) / step + 1e-9));
    for (std::int64_t i = 0; i <= n; ++i) out.push_back(snap(a + static_cast<double>(i) * step));
  } else {
    for (const auto& item : split(v, ',')) out.push_back(to_double(key, item));
  }
  return out;
}

struct ParseState {
  ExperimentPlan plan;
  std::uint64_t seed_count = 10;
  double power_ratio = 10.0;
};

using Handler = std::function<void(ParseState&, const std::string& key, const std::string& value)>;

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> table = {
      {"traffic.alpha", [](ParseState& s, const auto& k, const auto& v) { s.plan.base.traffic.alpha = to_double(k, v); }},
      {"traffic.frame_bytes",
       [](ParseState& s, const auto& k, const auto& v) { s.plan.base.traffic.frame_bytes = to_int(k, v); }},
      {"traffic.load", [](ParseState& s, const auto& k, const auto& v) { s.plan.loads = parse_load_list(k, v); }},
      {"traffic.rate_bps",
       [](ParseState& s, const auto& k, const auto& v) { s.plan.base.traffic.rate_bps = to_double(k, v); }},
      {"traffic.seed", [](ParseState& s, const auto& k, const auto& v) { s.plan.base.traffic.seed = to_uint(k, v); }},
      {"dba.cycle_len_ns",
       [](ParseState& s, const auto& k, const auto& v) { s.plan.base.dba.cycle_len = SimTime{to_int(k, v)}; }},
      {"dba.cap_bytes", [](ParseState& s, const auto& k, const auto& v) { s.plan.base.dba.cap_bytes = to_int(k, v); }},
      {"dba.report_duration_ns",
       [](ParseState& s, const auto& k, const auto& v) { s.plan.base.dba.report_duration = SimTime{to_int(k, v)}; }},
      {"dba.report_deadline_ns",
       [](ParseState& s, const auto& k, const auto& v) { s.plan.base.dba.report_deadline = SimTime{to_int(k, v)}; }},
      {"dba.line_rate_bps",
       [](ParseState& s, const auto& k, const auto& v) { s.plan.base.dba.line_rate_bps = to_double(k, v); }},
      {"onu.q_w",
       [](ParseState& s, const auto& k, const auto& v) {
         s.plan.q_ws.clear();
         for (const auto& item : split(v, ',')) s.plan.q_ws.push_back(to_int(k, item));
       }},
      {"onu.delta_on_ns",
       [](ParseState& s, const auto& k, const auto& v) { s.plan.base.sleep.delta_on = SimTime{to_int(k, v)}; }},
      {"onu.wake_lead_ns",
       [](ParseState& s, const auto& k, const auto& v) { s.plan.base.sleep.wake_lead = SimTime{to_int(k, v)}; }},
      {"power.ratio", [](ParseState& s, const auto& k, const auto& v) { s.power_ratio = to_double(k, v); }},
      {"run.duration_s",
       [](ParseState& s, const auto& k, const auto& v) {
         s.plan.base.duration = SimTime{std::llround(to_double(k, v) * 1e9)};
       }},
      {"run.seeds",
       [](ParseState& s, const auto& k, const auto& v) {
         const std::int64_t n = to_int(k, v);
         if (n < 1) throw ConfigError(fmt::format("{}: at least one seed is required", k));
         s.seed_count = static_cast<std::uint64_t>(n);
       }},
      {"run.warmup_ns",
       [](ParseState& s, const auto& k, const auto& v) { s.plan.base.warmup = SimTime{to_int(k, v)}; }},
  };
  return table;
}

void apply(ParseState& s, const std::string& key, const std::string& value) {
  const auto& table = handlers();
  const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == key; });
  if (it == table.end()) throw ConfigError(fmt::format("{}: unknown configuration key", key));
  it->second(s, key, value);
}

ExperimentPlan finish(ParseState s) {
  if (!(s.power_ratio > 1.0)) throw ConfigError("power.ratio: must be > 1");
  s.plan.base.power = metrics::PowerProfile{1.0, 1.0 / s.power_ratio};
  s.plan.seeds.clear();
  for (std::uint64_t i = 0; i < s.seed_count; ++i) s.plan.seeds.push_back(s.plan.base.traffic.seed + i);
  s.plan.validate();
  return std::move(s.plan);
}

}  // namespace

void ExperimentPlan::validate() const {
  if (loads.empty()) throw ConfigError("traffic.load: no load values");
  if (q_ws.empty()) throw ConfigError("onu.q_w: no threshold values");
  if (seeds.empty()) throw ConfigError("run.seeds: no seeds");
  for (double load : loads) {
    if (!(load > 0.0 && load < 1.0)) throw ConfigError(fmt::format("traffic.load: {} is outside (0, 1)", load));
  }
  for (std::int64_t q : q_ws) {
    if (q < 1) throw ConfigError(fmt::format("onu.q_w: {} must be >= 1", q));
  }
  try {
    run_config(loads.front(), q_ws.front(), seeds.front()).validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

SimulationConfig ExperimentPlan::run_config(double load, std::int64_t q_w, std::uint64_t seed) const {
  SimulationConfig cfg = base;
  cfg.traffic.load = load;
  cfg.sleep.q_w = q_w;
  cfg.traffic.seed = traffic::derive_stream_seed(seed, load);
  return cfg;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : handlers()) k.push_back(name);
    return k;
  }();
  return keys;
}

ExperimentPlan parse_config(std::istream& text, const Overrides& overrides) {
  ParseState s;
  std::string line;
  int line_no = 0;
  while (std::getline(text, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("line {}: missing key", line_no));
    apply(s, key, value);
  }
  for (const auto& [key, value] : overrides) apply(s, key, value);
  return finish(std::move(s));
}

ExperimentPlan parse_config(const Overrides& overrides) {
  std::istringstream empty;
  return parse_config(empty, overrides);
}

ExperimentPlan parse_config_file(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("--config: cannot open '{}'", path.string()));
  return parse_config(in, overrides);
}

std::string trace_file_name(double load, std::int64_t q_w, std::uint64_t seed) {
  return fmt::format("trace_load{}_qw{}_seed{}.txt", load, q_w, seed);
}

RunRecord run_one(const SimulationConfig& cfg, std::uint64_t seed, const RunOptions& options) {
  std::ofstream file;
  if (options.trace_dir) {
    std::filesystem::create_directories(*options.trace_dir);
    const auto path = *options.trace_dir / trace_file_name(cfg.traffic.load, cfg.sleep.q_w, seed);
    file.open(path);
    if (!file) throw std::runtime_error(fmt::format("cannot write trace '{}'", path.string()));
  }
  std::optional<validate::TraceValidator> checker;
  if (options.validate) checker.emplace(cfg.trace_config());

  std::optional<trace::TraceWriter> writer;
  if (file.is_open() || checker) {
    writer.emplace([&](std::string_view line) {
      if (file.is_open()) {
        file.write(line.data(), static_cast<std::streamsize>(line.size()));
        file.put('\n');
      }
      if (checker) checker->feed(line);
    });
  }
  const RunResult run = simulate(cfg, writer ? &*writer : nullptr);

  RunRecord rec;
  rec.summary = summarize(cfg, run, seed);
  rec.final_queue_frames = run.final_queue_frames;
  rec.delivered_bytes = run.delivered_bytes;
  if (checker) {
    rec.trace_lines = checker->lines();
    rec.violations = checker->finish();
  }
  return rec;
}

ExperimentResult run_experiment(const ExperimentPlan& plan, const RunOptions& options) {
  plan.validate();
  struct Point {
    double load;
    std::int64_t q_w;
    std::uint64_t seed;
  };
  std::vector<Point> points;
  for (double load : plan.loads) {
    for (std::int64_t q : plan.q_ws) {
      for (std::uint64_t seed : plan.seeds) points.push_back({load, q, seed});
    }
  }

  ExperimentResult result;
  result.runs.resize(points.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      try {
        const Point& p = points[i];
        result.runs[i] = run_one(plan.run_config(p.load, p.q_w, p.seed), p.seed, options);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = points.size();
      }
    }
  };
  const unsigned jobs = std::max(1U, std::min<unsigned>(options.jobs, static_cast<unsigned>(points.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  if (options.validate) {
    std::string report;
    for (const auto& r : result.runs) {
      for (const auto& v : r.violations) {
        report += fmt::format("load={} q_w={} seed={}: {} ns {} {}\n", r.summary.load, r.summary.q_w,
                              r.summary.seed.value_or(0), v.time.count(), validate::rule_id(v.rule), v.detail);
      }
    }
    if (!report.empty()) throw ValidationFailure("trace validation failed:\n" + report);
  }

  if (plan.seeds.size() >= 2) {
    const std::size_t per_group = plan.seeds.size();
    for (std::size_t g = 0; g < points.size(); g += per_group) {
      std::vector<metrics::MetricsSummary> group;
      for (std::size_t i = g; i < g + per_group; ++i) group.push_back(result.runs[i].summary);
      result.aggregates.push_back(metrics::aggregate(group));
    }
  }
  return result;
}

std::string csv_row(const metrics::MetricsSummary& s) {
  const bool agg = !s.seed.has_value();
  const std::string seed = agg ? "agg" : std::to_string(*s.seed);
  const std::string frames_in = agg ? fmt::format("{:.1f}", s.frames_in) : fmt::format("{:.0f}", s.frames_in);
  const std::string frames_out = agg ? fmt::format("{:.1f}", s.frames_out) : fmt::format("{:.0f}", s.frames_out);
  const std::string ci_power = s.ci95_power ? fmt::format("{:.6f}", *s.ci95_power) : "";
  const std::string ci_delay = s.ci95_delay_s ? fmt::format("{:.6f}", *s.ci95_delay_s * 1e3) : "";
  return fmt::format("{},{},{},{:.9f},{:.9f},{:.9f},{:.9f},{:.6f},{:.6f},{:.6f},{},{},{},{}", s.load, s.q_w, seed,
                     s.t_off_s, s.t_wait_s, s.t_trans_s, s.t_on_s, s.power_pct, s.mean_delay_s * 1e3,
                     s.p95_delay_s * 1e3, frames_in, frames_out, ci_power, ci_delay);
}

void write_csv(std::ostream& os, const ExperimentResult& result) {
  os << kCsvHeader << '\n';
  const std::size_t groups = result.aggregates.size();
  const std::size_t per_group = groups ? result.runs.size() / groups : result.runs.size();
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    os << csv_row(result.runs[i].summary) << '\n';
    if (groups && (i + 1) % per_group == 0) os << csv_row(result.aggregates[i / per_group]) << '\n';
  }
}

namespace {

struct PlotPoint {
  double off = 0, wait = 0, trans = 0, on = 0, power = 0, delay_ms = 0;
  int n = 0;
  bool from_agg = false;
};

std::string fmt_or_nan(const std::map<std::int64_t, PlotPoint>& row, std::int64_t q,
                       double (*get)(const PlotPoint&)) {
  const auto it = row.find(q);
  return it == row.end() ? std::string("nan") : fmt::format("{:.6f}", get(it->second));
}

}  // namespace

void emit_plotdata(std::istream& csv, const std::filesystem::path& dir, const metrics::PowerProfile& profile) {
  std::string line;
  if (!std::getline(csv, line)) throw ConfigError("results CSV: empty input");
  const auto header = split(line, ',');
  auto col = [&](std::string_view name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError(fmt::format("results CSV: missing column '{}'", name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_load = col("load"), c_qw = col("q_w"), c_seed = col("seed"), c_off = col("t_off_s"),
                    c_wait = col("t_wait_s"), c_trans = col("t_trans_s"), c_on = col("t_on_s"),
                    c_power = col("power_pct"), c_delay = col("mean_delay_ms");

  // Aggregate rows win; otherwise per-seed rows are averaged.
  std::map<double, std::map<std::int64_t, PlotPoint>> table;
  std::set<std::int64_t> thresholds;
  while (std::getline(csv, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() < header.size()) throw ConfigError("results CSV: short row");
    const double load = to_double("load", f[c_load]);
    const std::int64_t q = to_int("q_w", f[c_qw]);
    thresholds.insert(q);
    PlotPoint& p = table[load][q];
    const bool agg = f[c_seed] == "agg";
    if (p.from_agg && !agg) continue;
    if (agg && !p.from_agg) p = PlotPoint{.from_agg = true};
    const double w = 1.0 / (p.n + 1);
    auto blend = [&](double& acc, std::size_t c, std::string_view name) {
      acc += (to_double(std::string(name), f[c]) - acc) * w;
    };
    blend(p.off, c_off, "t_off_s");
    blend(p.wait, c_wait, "t_wait_s");
    blend(p.trans, c_trans, "t_trans_s");
    blend(p.on, c_on, "t_on_s");
    blend(p.power, c_power, "power_pct");
    blend(p.delay_ms, c_delay, "mean_delay_ms");
    ++p.n;
  }

  std::filesystem::create_directories(dir);
  std::ofstream fig3(dir / "fig3_state_fractions.tsv");
  std::ofstream fig4(dir / "fig4_power.tsv");
  std::ofstream fig5(dir / "fig5_delay.tsv");
  if (!fig3 || !fig4 || !fig5) throw std::runtime_error("cannot write plot data into " + dir.string());

  fig3 << "load";
  fig4 << "load";
  fig5 << "load";
  for (std::int64_t q : thresholds) {
    fig3 << fmt::format("\toff_qw{0}\twait_qw{0}\ttrans_qw{0}\ton_qw{0}", q);
    fig4 << fmt::format("\tpower_pct_qw{}", q);
    fig5 << fmt::format("\tmean_delay_ms_qw{}", q);
  }
  fig4 << "\tideal_pct\n";
  fig3 << '\n';
  fig5 << '\n';

  for (const auto& [load, row] : table) {
    const std::string key = fmt::format("{}", load);
    fig3 << key;
    fig4 << key;
    fig5 << key;
    for (std::int64_t q : thresholds) {
      const auto it = row.find(q);
      if (it == row.end()) {
        fig3 << "\tnan\tnan\tnan\tnan";
      } else {
        const PlotPoint& p = it->second;
        const double total = p.off + p.wait + p.trans + p.on;
        fig3 << fmt::format("\t{:.9f}\t{:.9f}\t{:.9f}\t{:.9f}", p.off / total, p.wait / total, p.trans / total,
                            p.on / total);
      }
      fig4 << '\t' << fmt_or_nan(row, q, [](const PlotPoint& p) { return p.power; });
      fig5 << '\t' << fmt_or_nan(row, q, [](const PlotPoint& p) { return p.delay_ms; });
    }
    fig4 << fmt::format("\t{:.6f}\n", metrics::ideal_power_pct(load, profile));
    fig3 << '\n';
    fig5 << '\n';
  }
}

}  // namespace epon::experiment
