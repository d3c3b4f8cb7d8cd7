#pragma once

// Exhaustive ground-truth planner and executor for small models.
//
// Everything here runs on its own integer-coded compilation of the model and
// deliberately shares no condition or effect code with the validator, so the
// two can be tested against each other.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <vector>

#include "mfr/mdl.hpp"
#include "mfr/model.hpp"

namespace mfr {

struct SearchStats {
  std::uint64_t states_expanded = 0;
  std::uint64_t frontier_peak = 0;
  int depth_reached = 0;
};

struct SearchLimits {
  std::uint64_t max_state_space = 1'000'000;
  std::uint64_t max_frontier = 1'000'000;
  std::uint64_t max_plans = 5'000'000;
};

class CeilingExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SearchCancelled : public std::runtime_error {
 public:
  SearchCancelled() : std::runtime_error("search cancelled") {}
};

struct SolveResult {
  std::optional<Plan> plan;
  SearchStats stats;
};

/// Breadth-first search over ground actions from the initial state. Returns a
/// shortest plan reaching the goal without passing through a state that
/// violates a constraint; ties go to the lexicographically smallest sequence
/// by (action name, argument member positions).
SolveResult solve(const ProblemModel& model, int max_depth, const SearchLimits& limits = {},
                  std::stop_token cancel = {});

/// Every action sequence of exactly `depth` steps that executes without
/// violation (goal not required), in lexicographic order.
std::vector<Plan> enumerate_valid_plans(const ProblemModel& model, int depth, const SearchLimits& limits = {},
                                        std::stop_token cancel = {});

struct ReferenceVerdict {
  bool accepted = false;
  std::string reason;  // first rejection reason; empty when accepted
};

/// Independent executor: accepts iff the plan executes step by step without
/// any violation and ends in a goal state.
ReferenceVerdict execute_reference(const ProblemModel& model, const Plan& plan);

/// All ground actions of the model in tie-break order.
std::vector<ParsedStep> ground_actions(const ProblemModel& model);

}  // namespace mfr
