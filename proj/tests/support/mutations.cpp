#include "mutations.hpp"

#include <sstream>
#include <stdexcept>

#include "epon/simulation.hpp"

namespace epon::testing {

namespace {

struct Rec {
  std::int64_t time = -1;
  std::string kind;
  std::vector<std::string> fields;
};

Rec parse(const std::string& line) {
  Rec r;
  if (line.empty() || line.front() == '#') return r;
  std::istringstream in(line);
  in >> r.time >> r.kind;
  std::string f;
  while (in >> f) r.fields.push_back(f);
  return r;
}

std::string unparse(std::int64_t t, const std::string& kind, const std::vector<std::string>& fields) {
  std::string s = std::to_string(t) + " " + kind;
  for (const auto& f : fields) s += " " + f;
  return s;
}

std::size_t find(const std::vector<std::string>& lines, std::size_t from, auto pred) {
  for (std::size_t i = from; i < lines.size(); ++i) {
    if (pred(parse(lines[i]))) return i;
  }
  throw std::runtime_error("mutation anchor not found in the clean trace");
}

std::int64_t cycle_len(const std::vector<std::string>& lines) {
  return trace::TraceConfig::from_header_line(lines.at(1)).cycle_len.count();
}

}  // namespace

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

std::string clean_trace(double load, std::int64_t q_w, double seconds, SimTime wake_lead) {
  SimulationConfig cfg;
  cfg.traffic.load = load;
  cfg.traffic.seed = 42;
  cfg.sleep.q_w = q_w;
  cfg.sleep.wake_lead = wake_lead;
  cfg.duration = SimTime{static_cast<std::int64_t>(seconds * 1e9)};
  std::string text;
  trace::TraceWriter writer(trace::string_sink(text));
  simulate(cfg, &writer);
  return text;
}

std::vector<Mutant> make_mutants() {
  using validate::Rule;
  const auto base = split_lines(clean_trace());
  const std::int64_t C = cycle_len(base);
  std::vector<Mutant> out;

  {  // OFF jumps straight to ON
    auto l = base;
    const auto i = find(l, 2, [](const Rec& r) { return r.kind == "state" && r.fields[1] == "WAIT"; });
    const Rec r = parse(l[i]);
    l[i] = unparse(r.time, "state", {"OFF", "ON"});
    out.push_back({Rule::StateSequence, "injected OFF->ON transition", join_lines(l)});
  }
  {  // a second copy of the final report, sent after the power-off
    auto l = base;
    const auto i = find(l, 2, [](const Rec& r) { return r.kind == "state" && r.fields[0] == "ON"; });
    const auto rep = find(l, i - 3, [](const Rec& r) { return r.kind == "report"; });
    l.insert(l.begin() + static_cast<std::ptrdiff_t>(i) + 1, l[rep]);
    out.push_back({Rule::UnpoweredTransmission, "report while OFF", join_lines(l)});
  }
  {  // the first data burst after a wake-up happens before the TRANS->ON switch
    auto l = base;
    std::size_t from = 2;
    while (true) {
      const auto s = find(l, from, [](const Rec& r) { return r.kind == "state" && r.fields[0] == "TRANS"; });
      const auto next_state = find(l, s + 1, [](const Rec& r) { return r.kind == "state"; });
      const auto tx = find(l, s + 1, [](const Rec& r) { return r.kind == "tx"; });
      if (tx < next_state) {
        std::size_t last = tx;
        while (last + 1 < l.size() && parse(l[last + 1]).kind == "tx") ++last;
        const Rec moved = parse(l[s]);
        l.insert(l.begin() + static_cast<std::ptrdiff_t>(last) + 1, unparse(parse(l[last]).time, "state", moved.fields));
        l.erase(l.begin() + static_cast<std::ptrdiff_t>(s));
        break;
      }
      from = next_state;
    }
    out.push_back({Rule::TransData, "data frames sent in TRANS", join_lines(l)});
  }
  {  // an unearned grant
    auto l = base;
    const auto i = find(l, 2, [](const Rec& r) { return r.kind == "gate" && r.fields[3] == "0"; });
    Rec r = parse(l[i]);
    r.fields[3] = "1500";
    l[i] = unparse(r.time, "gate", r.fields);
    out.push_back({Rule::GrantRule, "grant without a report", join_lines(l)});
  }
  {  // report and grant zeroed consistently, but the frames still go out
    auto l = base;
    std::size_t from = 2;
    while (true) {
      const auto g = find(l, from, [](const Rec& r) { return r.kind == "gate" && r.fields[3] != "0"; });
      const std::int64_t k = std::stoll(parse(l[g]).fields[0]);
      std::size_t rep = l.size();
      for (std::size_t j = 2; j < g; ++j) {
        const Rec r = parse(l[j]);
        if (r.kind == "report" && r.time / C == k - 1) {
          rep = j;
          break;
        }
      }
      bool sends = false;
      for (std::size_t j = g; j < l.size(); ++j) {
        const Rec r = parse(l[j]);
        if (r.time / C > k) break;
        if (r.kind == "tx" && r.time / C == k) sends = true;
      }
      if (rep != l.size() && sends) {
        Rec r = parse(l[rep]);
        r.fields[0] = "0";
        l[rep] = unparse(r.time, "report", r.fields);
        Rec gr = parse(l[g]);
        gr.fields[3] = "0";
        l[g] = unparse(gr.time, "gate", gr.fields);
        break;
      }
      from = g + 1;
    }
    out.push_back({Rule::GrantOverrun, "frames sent beyond the grant", join_lines(l)});
  }
  {  // literal keepalive (wake_lead = 0) checked as if the lead covered WAIT+TRANS
    auto l = split_lines(clean_trace(0.05, 100, 1.0, SimTime{0}));
    auto cfg = trace::TraceConfig::from_header_line(l[1]);
    cfg.wake_lead = SimTime{3'500'000};
    l[1] = cfg.header_line();
    out.push_back({Rule::ReportCadence, "report gap above the deadline", join_lines(l)});
  }
  {  // transmitter switched on 1 ns too early
    auto l = base;
    const auto s = find(l, 2, [](const Rec& r) { return r.kind == "state" && r.fields[1] == "TRANS"; });
    const std::int64_t t = parse(l[s]).time;
    std::size_t first = s;
    while (first > 0 && parse(l[first - 1]).time == t) --first;
    for (std::size_t j = first; j <= s; ++j) {
      const Rec r = parse(l[j]);
      l[j] = unparse(t - 1, r.kind, r.fields);
    }
    out.push_back({Rule::PowerAnticipation, "power-on off by 1 ns", join_lines(l)});
  }
  {  // two departures swapped
    auto l = base;
    const auto i = find(l, 2, [](const Rec& r) { return r.kind == "tx"; });
    std::swap(l[i], l[i + 1]);
    out.push_back({Rule::FifoDeparture, "out-of-order departures", join_lines(l)});
  }
  {  // end marker short of the run length
    auto l = base;
    const Rec r = parse(l.back());
    l.back() = unparse(r.time - 1, "end", r.fields);
    out.push_back({Rule::TimePartition, "states do not cover the run", join_lines(l)});
  }
  return out;
}

std::string sixty_ms_gap_trace() {
  trace::TraceConfig cfg;
  cfg.duration = SimTime{100'000'000};
  std::vector<std::string> l = {
      std::string(trace::kMagic),
      cfg.header_line(),
      "0 cycle 0",
      "0 gate 0 0 52 0",
      "58000000 timer keepalive",
      "58000000 state OFF WAIT",
      "58000000 timer poweron",
      "58000000 power on",
      "58000000 state WAIT TRANS",
      "60000000 report 0 0",
      "100000000 end 0 0 0",
  };
  return join_lines(l);
}

}  // namespace epon::testing
