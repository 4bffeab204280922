#pragma once

// Synthetic broken traces for the checker: each mutant takes a clean
// simulator trace and damages it so that exactly one rule should fire.

#include <string>
#include <vector>

#include "epon/validate.hpp"

namespace epon::testing {

struct Mutant {
  validate::Rule rule;
  std::string description;
  std::string trace;
};

/// Clean trace of a short run (ρ=0.3, q_w=10 unless overridden).
std::string clean_trace(double load = 0.3, std::int64_t q_w = 10, double seconds = 2.0,
                        SimTime wake_lead = SimTime{3'500'000});

/// One mutant per rule, in rule order.
std::vector<Mutant> make_mutants();

/// Hand-written minimal trace whose only defect is a 60 ms report gap.
std::string sixty_ms_gap_trace();

std::vector<std::string> split_lines(const std::string& text);
std::string join_lines(const std::vector<std::string>& lines);

}  // namespace epon::testing
