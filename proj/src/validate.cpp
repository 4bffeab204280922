#include "epon/validate.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>

#include <fmt/format.h>

namespace epon::validate {

namespace {

constexpr std::array<std::string_view, kRuleCount> kRuleIds = {
    "state-sequence", "unpowered-transmission", "trans-data",  "grant-rule",    "grant-overrun",
    "report-cadence", "power-anticipation",     "fifo-departure", "time-partition",
};

class Tokens {
 public:
  explicit Tokens(std::string_view s, std::uint64_t line) : rest_(s), line_(line) {}

  std::string_view word() {
    while (!rest_.empty() && rest_.front() == ' ') rest_.remove_prefix(1);
    if (rest_.empty()) throw TraceFormatError(fmt::format("line {}: truncated record", line_));
    const auto sp = rest_.find(' ');
    const std::string_view w = rest_.substr(0, sp);
    rest_ = sp == std::string_view::npos ? std::string_view{} : rest_.substr(sp);
    return w;
  }

  std::int64_t integer() {
    const std::string_view w = word();
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || p != w.data() + w.size()) {
      throw TraceFormatError(fmt::format("line {}: expected an integer, got '{}'", line_, w));
    }
    return v;
  }

  std::string_view remainder() const { return rest_; }

 private:
  std::string_view rest_;
  std::uint64_t line_;
};

}  // namespace

std::string_view rule_id(Rule r) { return kRuleIds.at(static_cast<std::size_t>(r)); }

std::optional<Rule> rule_from_id(std::string_view id) {
  for (std::size_t i = 0; i < kRuleIds.size(); ++i) {
    if (kRuleIds[i] == id) return static_cast<Rule>(i);
  }
  return std::nullopt;
}

TraceValidator::TraceValidator(std::optional<trace::TraceConfig> cfg) : cfg_(std::move(cfg)) {}

const trace::TraceConfig& TraceValidator::cfg() const { return *cfg_; }

std::int64_t TraceValidator::cycle_of(SimTime t) const { return t.count() / cfg().cycle_len.count(); }

void TraceValidator::flag(SimTime t, Rule r, std::string detail) { out_.push_back({t, r, std::move(detail)}); }

void TraceValidator::feed(std::string_view line) {
  ++line_no_;
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.empty()) return;
  if (!saw_magic_) {
    if (line != trace::kMagic) throw TraceFormatError("not an epon trace (missing magic line)");
    saw_magic_ = true;
    return;
  }
  if (line.front() == '#') {
    if (line.starts_with("# config ") && !cfg_) {
      try {
        cfg_ = trace::TraceConfig::from_header_line(line);
      } catch (const std::invalid_argument& e) {
        throw TraceFormatError(e.what());
      }
    }
    return;
  }
  if (!cfg_) throw TraceFormatError("trace has no configuration header");
  Tokens tok(line, line_no_);
  const SimTime t{tok.integer()};
  const std::string_view kind = tok.word();
  record(t, kind, tok.remainder());
}

void TraceValidator::record(SimTime t, std::string_view kind, std::string_view rest) {
  Tokens tok(rest, line_no_);
  const auto& c = cfg();

  if (ended_) flag(t, Rule::TimePartition, "record after the end marker");
  if (t < last_time_) {
    flag(t, Rule::TimePartition, fmt::format("time goes backwards from {} ns", last_time_.count()));
  } else {
    last_time_ = t;
  }
  if (t < SimTime{0} || t > c.duration) flag(t, Rule::TimePartition, "record outside [0, duration]");

  const bool cadence_applies = c.wake_lead >= c.delta_on + c.cycle_len;
  const bool transmitter_live = powered_ && (state_ == St::Trans || state_ == St::On);

  if (kind == "cycle" || kind == "timer" || kind == "violation") {
    return;
  }
  if (kind == "gate") {
    const std::int64_t k = tok.integer();
    tok.integer();  // report time
    tok.integer();  // data slot start
    const std::int64_t grant = tok.integer();
    const std::int64_t expected = report_cycle_ == k - 1 ? std::min(report_bytes_, c.cap_bytes) : 0;
    if (grant != expected) {
      flag(t, Rule::GrantRule, fmt::format("cycle {} grant {} B, expected {} B", k, grant, expected));
    }
    grants_[k] = grant;
    while (!grants_.empty() && grants_.begin()->first < k - 2) grants_.erase(grants_.begin());
    return;
  }
  if (kind == "report") {
    const std::int64_t bytes = tok.integer();
    const std::int64_t frames = tok.integer();
    if (!transmitter_live) flag(t, Rule::UnpoweredTransmission, "report sent with the transmitter off");
    if (cadence_applies && t - last_report_ > c.report_deadline) {
      flag(t, Rule::ReportCadence, fmt::format("{} ns since the previous report", (t - last_report_).count()));
    }
    last_report_ = t;
    if (trans_entered_) {
      if (t - *trans_entered_ != c.delta_on) {
        flag(t, Rule::PowerAnticipation,
             fmt::format("transmitter powered {} ns before the report", (t - *trans_entered_).count()));
      }
      trans_entered_.reset();
    }
    const std::int64_t cyc = cycle_of(t);
    if (report_cycle_ != cyc) {
      report_cycle_ = cyc;
      report_bytes_ = bytes;
    }
    if (frames != static_cast<std::int64_t>(queue_.size())) {
      flag(t, Rule::FifoDeparture, fmt::format("report of {} frames, {} queued", frames, queue_.size()));
    }
    return;
  }
  if (kind == "state") {
    const std::string_view from = tok.word();
    const std::string_view to = tok.word();
    static constexpr std::array<std::string_view, 4> names = {"OFF", "WAIT", "TRANS", "ON"};
    auto index = [&](std::string_view n) -> int {
      for (int i = 0; i < 4; ++i) {
        if (names[static_cast<std::size_t>(i)] == n) return i;
      }
      throw TraceFormatError(fmt::format("line {}: unknown state '{}'", line_no_, n));
    };
    const int f = index(from);
    const int g = index(to);
    if (f != static_cast<int>(state_) || g != (f + 1) % 4) {
      flag(t, Rule::StateSequence,
           fmt::format("{} -> {} while in {}", from, to, names[static_cast<std::size_t>(state_)]));
    }
    if (state_ == St::Trans && trans_entered_) {
      flag(t, Rule::PowerAnticipation, "left TRANS without reporting");
      trans_entered_.reset();
    }
    if (t >= state_since_) partition_sum_ += (t - state_since_).count();
    state_since_ = t;
    state_ = static_cast<St>(g);
    if (state_ == St::Trans) trans_entered_ = t;
    return;
  }
  if (kind == "power") {
    const std::string_view v = tok.word();
    if (v != "on" && v != "off") throw TraceFormatError(fmt::format("line {}: bad power value", line_no_));
    powered_ = v == "on";
    return;
  }
  if (kind == "tx") {
    const auto id = static_cast<std::uint64_t>(tok.integer());
    const SimTime arrival{tok.integer()};
    const SimTime departure{tok.integer()};
    const std::int64_t bytes = tok.integer();
    ++departures_;
    if (!transmitter_live) flag(t, Rule::UnpoweredTransmission, fmt::format("frame {} sent unpowered", id));
    if (state_ == St::Trans) flag(t, Rule::TransData, fmt::format("frame {} sent in TRANS", id));

    const std::int64_t cyc = cycle_of(t);
    if (sent_cycle_ != cyc) {
      sent_cycle_ = cyc;
      sent_bytes_ = 0;
    }
    sent_bytes_ += bytes;
    const auto g = grants_.find(cyc);
    const std::int64_t grant = g == grants_.end() ? 0 : g->second;
    if (sent_bytes_ > grant) {
      flag(t, Rule::GrantOverrun, fmt::format("cycle {}: {} B sent, {} B granted", cyc, sent_bytes_, grant));
    }

    if (queue_.empty() || queue_.front().id != id || queue_.front().arrival != arrival) {
      flag(t, Rule::FifoDeparture, fmt::format("frame {} departs out of arrival order", id));
      auto it = std::find_if(queue_.begin(), queue_.end(), [id](const Pending& p) { return p.id == id; });
      if (it != queue_.end()) queue_.erase(it);
    } else {
      queue_.pop_front();
    }
    const auto serialization =
        static_cast<std::int64_t>(std::ceil(static_cast<double>(bytes) * 8e9 / c.line_rate_bps - 1e-9));
    if (departure < last_departure_ || departure < t || (departure - arrival).count() < serialization) {
      flag(t, Rule::FifoDeparture, fmt::format("frame {} has an impossible departure time", id));
    }
    last_departure_ = std::max(last_departure_, departure);
    return;
  }
  if (kind == "arrival") {
    const auto id = static_cast<std::uint64_t>(tok.integer());
    const std::int64_t frames = tok.integer();
    if (id != next_arrival_id_) flag(t, Rule::FifoDeparture, fmt::format("arrival id {} out of sequence", id));
    next_arrival_id_ = id + 1;
    ++arrivals_;
    queue_.push_back({id, t});
    if (frames != static_cast<std::int64_t>(queue_.size())) {
      flag(t, Rule::FifoDeparture, fmt::format("arrival reports {} queued, {} expected", frames, queue_.size()));
    }
    return;
  }
  if (kind == "end") {
    const std::int64_t frames = tok.integer();
    const auto in = static_cast<std::uint64_t>(tok.integer());
    const auto out = static_cast<std::uint64_t>(tok.integer());
    ended_ = true;
    if (t != c.duration) flag(t, Rule::TimePartition, "end marker is not at the run duration");
    if (t >= state_since_) partition_sum_ += (t - state_since_).count();
    state_since_ = t;
    if (partition_sum_ != c.duration.count()) {
      flag(t, Rule::TimePartition,
           fmt::format("state intervals cover {} ns of {} ns", partition_sum_, c.duration.count()));
    }
    if (frames != static_cast<std::int64_t>(queue_.size()) || in != arrivals_ || out != departures_) {
      flag(t, Rule::FifoDeparture, "frame conservation fails at the end of the run");
    }
    if (cadence_applies && t - last_report_ > c.report_deadline) {
      flag(t, Rule::ReportCadence, fmt::format("{} ns without a report at the end", (t - last_report_).count()));
    }
    return;
  }
  throw TraceFormatError(fmt::format("line {}: unknown record kind '{}'", line_no_, kind));
}

std::vector<Violation> TraceValidator::finish() {
  if (!saw_magic_) throw TraceFormatError("empty trace");
  if (!ended_) flag(last_time_, Rule::TimePartition, "trace has no end marker");
  return std::move(out_);
}

std::vector<Violation> validate(std::istream& in, std::optional<trace::TraceConfig> cfg) {
  TraceValidator v(std::move(cfg));
  std::string line;
  while (std::getline(in, line)) v.feed(line);
  return v.finish();
}

std::vector<Violation> validate_text(std::string_view text, std::optional<trace::TraceConfig> cfg) {
  TraceValidator v(std::move(cfg));
  while (!text.empty()) {
    const auto nl = text.find('\n');
    v.feed(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return v.finish();
}

}  // namespace epon::validate
