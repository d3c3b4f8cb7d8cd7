#pragma once

// Core types of the explicit problem model: entity sorts, typed state
// variables, action schemas, constraints and goal, plus the pure semantics
// shared by the checker and the validator (grounding, condition evaluation).

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace mfr {

/// Source line of a declaration. Carried for diagnostics only: two models
/// that differ only in line numbers compare equal.
struct SourceLine {
  int value = 0;
  friend bool operator==(const SourceLine&, const SourceLine&) { return true; }
};

// ---------------------------------------------------------------------------
// Values and domains

struct Symbol {
  std::string name;
  friend bool operator==(const Symbol&, const Symbol&) = default;
};

/// A literal or runtime value: boolean, integer, or symbol (enum member or
/// entity name).
using Value = std::variant<bool, std::int64_t, Symbol>;

std::string to_string(const Value& v);

struct BoolDomain {
  friend bool operator==(const BoolDomain&, const BoolDomain&) = default;
};
struct EnumDomain {
  std::vector<std::string> members;
  friend bool operator==(const EnumDomain&, const EnumDomain&) = default;
};
struct IntDomain {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  friend bool operator==(const IntDomain&, const IntDomain&) = default;
};
using Domain = std::variant<BoolDomain, EnumDomain, IntDomain>;

bool domain_contains(const Domain& d, const Value& v);
std::uint64_t domain_size(const Domain& d);

// ---------------------------------------------------------------------------
// Terms and conditions

/// `name(arg, ...)`: an explicit variable reference. Arguments are
/// identifiers: action parameters or entity members.
struct VarRef {
  std::string name;
  std::vector<std::string> args;
  friend bool operator==(const VarRef&, const VarRef&) = default;
};

/// A bare identifier. Resolved in context: action parameter, then
/// zero-arity variable, then symbol literal.
struct NameRef {
  std::string name;
  friend bool operator==(const NameRef&, const NameRef&) = default;
};

struct IntLit {
  std::int64_t value = 0;
  friend bool operator==(const IntLit&, const IntLit&) = default;
};

struct BoolLit {
  bool value = false;
  friend bool operator==(const BoolLit&, const BoolLit&) = default;
};

using Term = std::variant<VarRef, NameRef, IntLit, BoolLit>;

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

const char* to_string(CmpOp op);

struct Comparison {
  Term lhs;
  CmpOp op = CmpOp::Eq;
  Term rhs;
  SourceLine line;
  friend bool operator==(const Comparison&, const Comparison&) = default;
};

/// Conjunction of comparisons. Empty is true.
using Condition = std::vector<Comparison>;

struct AssignUpdate {
  Term value;
  friend bool operator==(const AssignUpdate&, const AssignUpdate&) = default;
};

/// `target := source ± delta`
struct DeltaUpdate {
  Term source;
  std::int64_t delta = 0;
  friend bool operator==(const DeltaUpdate&, const DeltaUpdate&) = default;
};

struct Effect {
  VarRef target;
  std::variant<AssignUpdate, DeltaUpdate> update;
  SourceLine line;
  friend bool operator==(const Effect&, const Effect&) = default;
};

std::string to_string(const Term& t);
std::string to_string(const Comparison& c);
std::string to_string(const Effect& e);

// ---------------------------------------------------------------------------
// Declarations

struct EntitySort {
  std::string name;
  std::vector<std::string> members;
  SourceLine line;
  friend bool operator==(const EntitySort&, const EntitySort&) = default;
};

struct VariableDecl {
  std::string name;
  std::vector<std::string> params;  // sort names
  Domain domain;
  Value initial;
  SourceLine line;
  friend bool operator==(const VariableDecl&, const VariableDecl&) = default;
};

/// `init name(member, ...) = value`: overrides the declared default for one
/// grounding. Later overrides win.
struct InitOverride {
  std::string variable;
  std::vector<std::string> args;
  Value value;
  SourceLine line;
  friend bool operator==(const InitOverride&, const InitOverride&) = default;
};

struct Parameter {
  std::string name;
  std::string sort;
  friend bool operator==(const Parameter&, const Parameter&) = default;
};

struct ActionSchema {
  std::string name;
  std::vector<Parameter> params;
  Condition preconditions;
  std::vector<Effect> effects;
  SourceLine line;
  friend bool operator==(const ActionSchema&, const ActionSchema&) = default;
};

struct ProblemModel {
  std::string name;
  std::vector<EntitySort> sorts;
  std::vector<VariableDecl> variables;
  std::vector<InitOverride> inits;
  std::vector<ActionSchema> actions;
  Condition constraints;
  Condition goal;
  friend bool operator==(const ProblemModel&, const ProblemModel&) = default;

  const EntitySort* find_sort(const std::string& name) const;
  const VariableDecl* find_variable(const std::string& name) const;
  const ActionSchema* find_action(const std::string& name) const;
};

// ---------------------------------------------------------------------------
// Errors

enum class GroundingErrorKind { ArityMismatch, UndefinedEntity, UndefinedAction };

class GroundingError : public std::runtime_error {
 public:
  GroundingError(GroundingErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  GroundingErrorKind kind() const { return kind_; }

 private:
  GroundingErrorKind kind_;
};

/// A term that cannot be grounded or typed at evaluation time. Indicates a
/// modeling defect; the validator reports it as a TypeError violation.
class UnresolvedReference : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Grounded state

/// A grounded state variable: `name(member, ...)`.
struct GroundVar {
  std::string name;
  std::vector<std::string> args;
  friend bool operator==(const GroundVar&, const GroundVar&) = default;
  friend auto operator<=>(const GroundVar&, const GroundVar&) = default;
};

std::string to_string(const GroundVar& g);

/// Enumerates every grounded variable of a model in a fixed order
/// (declaration order, then cartesian order of sort members with the last
/// parameter varying fastest). States index their values by this layout.
class StateLayout {
 public:
  explicit StateLayout(const ProblemModel& model);

  std::size_t size() const { return vars_.size(); }
  const GroundVar& var(std::size_t i) const { return vars_[i]; }
  const Domain& domain(std::size_t i) const { return domain_storage_[domain_index_[i]]; }
  std::optional<std::size_t> index_of(const std::string& name,
                                      const std::vector<std::string>& args) const;

 private:
  std::vector<GroundVar> vars_;
  std::vector<std::size_t> domain_index_;
  std::vector<Domain> domain_storage_;
  std::unordered_map<std::string, std::size_t> index_;
};

class State {
 public:
  State() = default;
  State(std::shared_ptr<const StateLayout> layout, std::vector<Value> values)
      : layout_(std::move(layout)), values_(std::move(values)) {}

  const StateLayout& layout() const { return *layout_; }
  std::shared_ptr<const StateLayout> layout_ptr() const { return layout_; }
  std::size_t size() const { return values_.size(); }
  const Value& at(std::size_t i) const { return values_.at(i); }
  const std::vector<Value>& values() const { return values_; }

  /// Value of `name(args...)`; throws UnresolvedReference if absent.
  const Value& get(const std::string& name, const std::vector<std::string>& args = {}) const;

  State with(std::size_t i, Value v) const;

  friend bool operator==(const State& a, const State& b) { return a.values_ == b.values_; }

 private:
  std::shared_ptr<const StateLayout> layout_;
  std::vector<Value> values_;
};

struct GroundAction {
  std::string schema;
  std::vector<std::string> args;
  friend bool operator==(const GroundAction&, const GroundAction&) = default;
};

std::string to_string(const GroundAction& a);

/// Parameter name → entity member.
using Binding = std::map<std::string, std::string>;

// ---------------------------------------------------------------------------
// Operations

/// Builds the total assignment from declared defaults and init overrides.
/// Requires a semantically clean model.
State initial_state(const ProblemModel& model);

/// Resolves a term to a value under `binding`. Throws UnresolvedReference.
Value evaluate_term(const Term& term, const State& state, const Binding& binding);

bool evaluate_comparison(const Comparison& cmp, const State& state, const Binding& binding);

/// True iff every comparison holds. Throws UnresolvedReference.
bool evaluate_condition(const Condition& cond, const State& state, const Binding& binding = {});

/// Checks arity and sort membership. Throws GroundingError.
GroundAction ground_action(const ActionSchema& schema, const std::vector<std::string>& args,
                           const ProblemModel& model);

Binding make_binding(const ActionSchema& schema, const GroundAction& action);

/// Grounds a variable reference: arguments that name a bound parameter are
/// replaced by the bound member.
GroundVar ground_ref(const VarRef& ref, const Binding& binding);

}  // namespace mfr
