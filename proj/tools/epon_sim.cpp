// Experiment runner: (load x q_w x seed) sweeps of the ONU packet-coalescing
// simulator, written as CSV plus optional traces and plot data.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epon/experiment.hpp"

namespace ex = epon::experiment;

int main(int argc, char** argv) {
  CLI::App app{"EPON upstream packet-coalescing simulator"};

  std::string config_path;
  std::string load, qw, seeds, duration_s, out, trace_dir, plotdata;
  std::vector<std::string> sets;
  bool validate = false;
  bool list_keys = false;
  unsigned jobs = 1;

  app.add_option("--config", config_path, "Flat 'key = value' configuration file");
  app.add_option("--load", load, "Offered load, a comma list or start:stop:step");
  app.add_option("--qw", qw, "Wake threshold(s) in frames, comma list");
  app.add_option("--seeds", seeds, "Number of seeds per sweep point");
  app.add_option("--duration-s", duration_s, "Simulated seconds per run");
  app.add_option("--set", sets, "Override any configuration key: key=value")->take_all();
  app.add_option("--out", out, "Results CSV (default: stdout)");
  app.add_option("--trace-dir", trace_dir, "Write one trace per run into this directory");
  app.add_flag("--validate", validate, "Check every run's trace and abort on a violation");
  app.add_option("--plotdata", plotdata, "Write per-figure TSV files into this directory");
  app.add_option("--jobs", jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);
  app.add_flag("--list-keys", list_keys, "Print the configuration keys and exit");
  CLI11_PARSE(app, argc, argv);

  if (list_keys) {
    for (const auto& k : ex::known_keys()) std::cout << k << '\n';
    return 0;
  }

  try {
    // Command-line values take precedence over the file.
    ex::Overrides overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ex::ConfigError("--set: expected key=value, got '" + s + "'");
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!load.empty()) overrides.emplace_back("traffic.load", load);
    if (!qw.empty()) overrides.emplace_back("onu.q_w", qw);
    if (!seeds.empty()) overrides.emplace_back("run.seeds", seeds);
    if (!duration_s.empty()) overrides.emplace_back("run.duration_s", duration_s);

    const ex::ExperimentPlan plan =
        config_path.empty() ? ex::parse_config(overrides) : ex::parse_config_file(config_path, overrides);

    ex::RunOptions options;
    if (!trace_dir.empty()) options.trace_dir = trace_dir;
    options.validate = validate;
    options.jobs = jobs;

    const ex::ExperimentResult result = ex::run_experiment(plan, options);

    std::ostringstream csv;
    ex::write_csv(csv, result);
    if (out.empty()) {
      std::cout << csv.str();
    } else {
      std::ofstream file(out);
      if (!file) throw std::runtime_error("cannot write " + out);
      file << csv.str();
    }
    if (!plotdata.empty()) {
      std::istringstream in(csv.str());
      ex::emit_plotdata(in, plotdata, plan.base.power);
    }
    if (validate) std::cerr << "validated " << result.runs.size() << " runs: no violations\n";
  } catch (const ex::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const ex::ValidationFailure& e) {
    std::cerr << e.what();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
