#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfr/model.hpp"

namespace mfr {

enum class IssueKind {
  DuplicateName,
  UndefinedReference,
  TypeMismatch,
  InitialOutOfDomain,
  UnreachableGoalSymbol,
  ConflictingEffects,
};

const char* to_string(IssueKind k);

struct SemanticIssue {
  IssueKind kind;
  std::string subject;  // e.g. "goal", "var.fuel", "action.move"
  std::string message;
  int line = 0;
  friend bool operator==(const SemanticIssue&, const SemanticIssue&) = default;
};

/// Empty iff the model is coherent: unique names, resolvable references,
/// well-typed comparisons and effects, in-domain initial values, and no
/// syntactically conflicting effects. Issues come in declaration order, then
/// by kind.
std::vector<SemanticIssue> check_model(const ProblemModel& model);

/// `LINE:KIND:SUBJECT:MESSAGE`
std::string format_issue(const SemanticIssue& issue);

struct StateSpaceSize {
  std::uint64_t value = 0;  // saturates at 2^63 - 1
  bool saturated = false;
};

/// Product of domain sizes over all grounded variables.
StateSpaceSize state_space_size(const ProblemModel& model);

}  // namespace mfr
