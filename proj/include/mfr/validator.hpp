#pragma once

// Step-by-step plan simulation against a problem model. Every failure is
// reported in-band as a classified Violation.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mfr/mdl.hpp"
#include "mfr/model.hpp"

namespace mfr {

enum class ViolationClass {
  UnparsedStep,
  UndefinedAction,
  ArityMismatch,
  UndefinedEntity,
  PreconditionFailure,
  ConstraintViolation,
  TypeError,
  GoalUnmet,
};

const char* to_string(ViolationClass c);
std::optional<ViolationClass> violation_class_from_string(std::string_view s);

struct Violation {
  int step_index = 0;  // 0 = initial state; GoalUnmet uses the plan length
  ViolationClass cls = ViolationClass::TypeError;
  std::string detail;
  friend bool operator==(const Violation&, const Violation&) = default;
};

enum class ValidationMode { HaltOnFirst, ContinueAndSkip };

struct ValidationReport {
  std::vector<State> states;  // states[0] is the initial state
  std::vector<Violation> violations;
  bool goal_satisfied = false;
  std::optional<int> halted_at;
  /// Step index that produced states[i]; 0 for the initial state.
  std::vector<int> state_steps;
  int plan_length = 0;
};

/// Applies a grounded action: checks preconditions in declaration order and
/// applies all effects simultaneously from the pre-step state. Out-of-domain
/// results are TypeError; values are never clamped. Constraints are not
/// checked here.
std::variant<State, Violation> apply_step(const State& state, const GroundAction& action,
                                          const ProblemModel& model);

/// Resolves, grounds and applies one plan step, then checks constraints on
/// the successor. Returns the successor or every violation the step caused.
std::variant<State, std::vector<Violation>> execute_step(const State& state, const PlanStep& step,
                                                         const ProblemModel& model);

/// Constraint violations of `state`, tagged with `step_index`.
std::vector<Violation> check_constraints(const State& state, const ProblemModel& model, int step_index);

ValidationReport validate_plan(const ProblemModel& model, const Plan& plan, ValidationMode mode);

/// `name: old -> new` lines for every variable that differs.
std::vector<std::string> describe_changes(const State& before, const State& after);

/// Human-readable trace: initial checks, one block per step, and a final
/// `GOAL:` line.
std::string trace_render(const ValidationReport& report, const ProblemModel& model, const Plan& plan = {});

}  // namespace mfr
