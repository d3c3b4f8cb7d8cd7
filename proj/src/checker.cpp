#include "mfr/checker.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <set>

namespace mfr {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

enum class Kind { Unknown, Bool, Int, Symbolic };

/// Static type of a term in some context.
struct TermType {
  Kind kind = Kind::Unknown;
  std::optional<IntDomain> range;         // Int from a variable
  std::vector<std::string> symbols;       // Symbolic: admissible members
  std::optional<std::string> literal;     // Symbolic literal
  std::optional<std::int64_t> int_value;  // Int literal
  bool is_variable = false;
};

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::Bool:
      return "bool";
    case Kind::Int:
      return "int";
    case Kind::Symbolic:
      return "symbol";
    default:
      return "unknown";
  }
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

bool intersects(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  for (const auto& x : a)
    if (contains(b, x)) return true;
  return false;
}

class Checker {
 public:
  explicit Checker(const ProblemModel& m) : model_(m) {
    for (const auto& s : m.sorts)
      for (const auto& e : s.members) known_symbols_.insert(e);
    for (const auto& v : m.variables)
      if (const auto* e = std::get_if<EnumDomain>(&v.domain))
        for (const auto& x : e->members) known_symbols_.insert(x);
  }

  std::vector<SemanticIssue> run() {
    check_sorts();
    check_variables();
    check_inits();
    check_actions();
    for (const auto& c : model_.constraints) {
      begin("constraint", c.line.value);
      check_comparison(c, nullptr, false);
      end();
    }
    for (const auto& g : model_.goal) {
      begin("goal", g.line.value);
      check_comparison(g, nullptr, true);
      end();
    }
    return std::move(issues_);
  }

 private:
  void begin(std::string subject, int line) {
    subject_ = std::move(subject);
    line_ = line;
    pending_.clear();
  }
  void end() {
    std::stable_sort(pending_.begin(), pending_.end(),
                     [](const SemanticIssue& a, const SemanticIssue& b) { return a.kind < b.kind; });
    issues_.insert(issues_.end(), pending_.begin(), pending_.end());
    pending_.clear();
  }
  void report(IssueKind kind, std::string message) {
    pending_.push_back({kind, subject_, std::move(message), line_});
  }

  void check_sorts() {
    std::set<std::string> seen;
    for (const auto& s : model_.sorts) {
      begin("entity." + s.name, s.line.value);
      if (!seen.insert(s.name).second) report(IssueKind::DuplicateName, "sort '" + s.name + "' declared twice");
      std::set<std::string> members;
      for (const auto& e : s.members)
        if (!members.insert(e).second)
          report(IssueKind::DuplicateName, "entity '" + e + "' listed twice in sort " + s.name);
      end();
    }
  }

  void check_variables() {
    std::set<std::string> seen;
    for (const auto& v : model_.variables) {
      begin("var." + v.name, v.line.value);
      if (!seen.insert(v.name).second) report(IssueKind::DuplicateName, "variable '" + v.name + "' declared twice");
      for (const auto& p : v.params)
        if (!model_.find_sort(p)) report(IssueKind::UndefinedReference, "unknown sort '" + p + "'");
      if (const auto* e = std::get_if<EnumDomain>(&v.domain)) {
        std::set<std::string> members;
        for (const auto& x : e->members)
          if (!members.insert(x).second) report(IssueKind::DuplicateName, "enumeration member '" + x + "' repeated");
      }
      if (!domain_contains(v.domain, v.initial))
        report(IssueKind::InitialOutOfDomain, "initial value " + to_string(v.initial) + " not in domain");
      end();
    }
  }

  void check_inits() {
    for (const auto& init : model_.inits) {
      begin("init." + init.variable, init.line.value);
      const VariableDecl* v = model_.find_variable(init.variable);
      if (!v) {
        report(IssueKind::UndefinedReference, "unknown variable '" + init.variable + "'");
      } else {
        if (init.args.size() != v->params.size()) {
          report(IssueKind::TypeMismatch, init.variable + " takes " + std::to_string(v->params.size()) +
                                              " argument(s), got " + std::to_string(init.args.size()));
        } else {
          for (std::size_t i = 0; i < init.args.size(); ++i) check_member(init.args[i], v->params[i]);
        }
        if (!domain_contains(v->domain, init.value))
          report(IssueKind::InitialOutOfDomain, "initial value " + to_string(init.value) + " not in domain");
      }
      end();
    }
  }

  void check_member(const std::string& entity, const std::string& sort_name) {
    const EntitySort* sort = model_.find_sort(sort_name);
    if (!sort) return;  // reported at the declaration
    if (contains(sort->members, entity)) return;
    bool known = false;
    for (const auto& s : model_.sorts) known = known || contains(s.members, entity);
    if (known)
      report(IssueKind::TypeMismatch, "'" + entity + "' is not a " + sort_name);
    else
      report(IssueKind::UndefinedReference, "unknown entity '" + entity + "'");
  }

  void check_actions() {
    std::set<std::string> seen;
    for (const auto& a : model_.actions) {
      begin("action." + a.name, a.line.value);
      if (!seen.insert(a.name).second) report(IssueKind::DuplicateName, "action '" + a.name + "' declared twice");
      std::set<std::string> params;
      for (const auto& p : a.params) {
        if (!params.insert(p.name).second) report(IssueKind::DuplicateName, "parameter '" + p.name + "' repeated");
        if (!model_.find_sort(p.sort)) report(IssueKind::UndefinedReference, "unknown sort '" + p.sort + "'");
      }
      for (const auto& c : a.preconditions) {
        line_ = c.line.value ? c.line.value : a.line.value;
        check_comparison(c, &a, false);
      }
      for (std::size_t i = 0; i < a.effects.size(); ++i) {
        line_ = a.effects[i].line.value ? a.effects[i].line.value : a.line.value;
        check_effect(a.effects[i], a);
        for (std::size_t j = 0; j < i; ++j)
          if (a.effects[j].target == a.effects[i].target)
            report(IssueKind::ConflictingEffects,
                   "two effects assign " + to_string(Term{a.effects[i].target}) + " in one action");
      }
      end();
    }
  }

  const Parameter* find_param(const ActionSchema* a, const std::string& name) const {
    if (!a) return nullptr;
    for (const auto& p : a->params)
      if (p.name == name) return &p;
    return nullptr;
  }

  TermType from_domain(const Domain& d) {
    TermType t;
    t.is_variable = true;
    std::visit(overloaded{[&](const BoolDomain&) { t.kind = Kind::Bool; },
                          [&](const EnumDomain& e) {
                            t.kind = Kind::Symbolic;
                            t.symbols = e.members;
                          },
                          [&](const IntDomain& r) {
                            t.kind = Kind::Int;
                            t.range = r;
                          }},
               d);
    return t;
  }

  TermType type_of_var(const VarRef& ref, const ActionSchema* action) {
    const VariableDecl* v = model_.find_variable(ref.name);
    if (!v) {
      report(IssueKind::UndefinedReference, "unknown variable '" + ref.name + "'");
      return {};
    }
    if (ref.args.size() != v->params.size()) {
      report(IssueKind::TypeMismatch, ref.name + " takes " + std::to_string(v->params.size()) +
                                          " argument(s), got " + std::to_string(ref.args.size()));
      return {};
    }
    for (std::size_t i = 0; i < ref.args.size(); ++i) {
      if (const Parameter* p = find_param(action, ref.args[i])) {
        if (p->sort != v->params[i])
          report(IssueKind::TypeMismatch, "parameter '" + p->name + "' is a " + p->sort + ", " + ref.name +
                                              " expects " + v->params[i]);
      } else {
        check_member(ref.args[i], v->params[i]);
      }
    }
    return from_domain(v->domain);
  }

  TermType type_of(const Term& term, const ActionSchema* action) {
    return std::visit(
        overloaded{[&](const VarRef& r) { return type_of_var(r, action); },
                   [&](const NameRef& n) -> TermType {
                     if (const Parameter* p = find_param(action, n.name)) {
                       TermType t;
                       t.kind = Kind::Symbolic;
                       if (const EntitySort* s = model_.find_sort(p->sort)) t.symbols = s->members;
                       t.is_variable = true;
                       return t;
                     }
                     if (model_.find_variable(n.name)) return type_of_var(VarRef{n.name, {}}, action);
                     if (!known_symbols_.count(n.name)) {
                       report(IssueKind::UndefinedReference, "unknown name '" + n.name + "'");
                       return {};
                     }
                     TermType t;
                     t.kind = Kind::Symbolic;
                     t.literal = n.name;
                     t.symbols = {n.name};
                     return t;
                   },
                   [](const IntLit& i) {
                     TermType t;
                     t.kind = Kind::Int;
                     t.int_value = i.value;
                     return t;
                   },
                   [](const BoolLit&) {
                     TermType t;
                     t.kind = Kind::Bool;
                     return t;
                   }},
        term);
  }

  void check_comparison(const Comparison& c, const ActionSchema* action, bool in_goal) {
    TermType lhs = type_of(c.lhs, action);
    TermType rhs = type_of(c.rhs, action);
    if (lhs.kind == Kind::Unknown || rhs.kind == Kind::Unknown) return;
    std::string text = "`" + to_string(c) + "`";
    if (lhs.kind != rhs.kind) {
      report(IssueKind::TypeMismatch, "compares " + kind_name(lhs.kind) + " with " + kind_name(rhs.kind) + " in " + text);
      return;
    }
    bool ordered = c.op != CmpOp::Eq && c.op != CmpOp::Ne;
    if (ordered && lhs.kind != Kind::Int) {
      report(IssueKind::TypeMismatch, "order comparison on " + kind_name(lhs.kind) + " in " + text);
      return;
    }
    if (lhs.kind != Kind::Symbolic) return;
    const TermType* lit = lhs.literal ? &lhs : rhs.literal ? &rhs : nullptr;
    const TermType* other = lit == &lhs ? &rhs : &lhs;
    if (lit && other->is_variable) {
      if (!contains(other->symbols, *lit->literal)) {
        if (in_goal)
          report(IssueKind::UnreachableGoalSymbol, "'" + *lit->literal + "' can never be a value here: " + text);
        else
          report(IssueKind::TypeMismatch, "'" + *lit->literal + "' is outside the compared domain in " + text);
      }
    } else if (!lit && !intersects(lhs.symbols, rhs.symbols)) {
      report(IssueKind::TypeMismatch, "operands have disjoint domains in " + text);
    }
  }

  void check_effect(const Effect& e, const ActionSchema& action) {
    TermType target = type_of_var(e.target, &action);
    std::string text = "`" + to_string(e) + "`";
    std::visit(
        overloaded{[&](const AssignUpdate& u) {
                     TermType value = type_of(u.value, &action);
                     if (target.kind == Kind::Unknown || value.kind == Kind::Unknown) return;
                     if (target.kind != value.kind) {
                       report(IssueKind::TypeMismatch,
                              "assigns " + kind_name(value.kind) + " to " + kind_name(target.kind) + " in " + text);
                       return;
                     }
                     if (target.kind == Kind::Int && value.int_value &&
                         (*value.int_value < target.range->lo || *value.int_value > target.range->hi)) {
                       report(IssueKind::TypeMismatch, "value outside target range in " + text);
                     } else if (target.kind == Kind::Symbolic) {
                       bool fits = std::all_of(value.symbols.begin(), value.symbols.end(),
                                               [&](const std::string& s) { return contains(target.symbols, s); });
                       if (!fits) report(IssueKind::TypeMismatch, "value domain is not within target domain in " + text);
                     }
                   },
                   [&](const DeltaUpdate& u) {
                     TermType source = type_of(u.source, &action);
                     if (target.kind == Kind::Unknown || source.kind == Kind::Unknown) return;
                     if (target.kind != Kind::Int || source.kind != Kind::Int || !source.is_variable)
                       report(IssueKind::TypeMismatch, "integer delta needs integer variables in " + text);
                   }},
        e.update);
  }

  const ProblemModel& model_;
  std::set<std::string> known_symbols_;
  std::vector<SemanticIssue> issues_;
  std::vector<SemanticIssue> pending_;
  std::string subject_;
  int line_ = 0;
};

}  // namespace

const char* to_string(IssueKind k) {
  switch (k) {
    case IssueKind::DuplicateName:
      return "duplicate-name";
    case IssueKind::UndefinedReference:
      return "undefined-reference";
    case IssueKind::TypeMismatch:
      return "type-mismatch";
    case IssueKind::InitialOutOfDomain:
      return "initial-out-of-domain";
    case IssueKind::UnreachableGoalSymbol:
      return "unreachable-goal-symbol";
    case IssueKind::ConflictingEffects:
      return "conflicting-effects";
  }
  return "?";
}

std::vector<SemanticIssue> check_model(const ProblemModel& model) { return Checker(model).run(); }

std::string format_issue(const SemanticIssue& issue) {
  return std::to_string(issue.line) + ":" + to_string(issue.kind) + ":" + issue.subject + ":" + issue.message;
}

StateSpaceSize state_space_size(const ProblemModel& model) {
  constexpr std::uint64_t kCeiling = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
  StateSpaceSize out{1, false};
  auto mul = [&](std::uint64_t f) {
    if (out.saturated) return;
    std::uint64_t r = 0;
    if (__builtin_mul_overflow(out.value, f, &r) || r > kCeiling) {
      out.value = kCeiling;
      out.saturated = true;
    } else {
      out.value = r;
    }
  };
  for (const auto& v : model.variables) {
    std::uint64_t groundings = 1;
    bool overflow = false;
    for (const auto& p : v.params) {
      const EntitySort* s = model.find_sort(p);
      std::uint64_t n = s ? s->members.size() : 0;
      overflow = overflow || __builtin_mul_overflow(groundings, n, &groundings);
    }
    std::uint64_t size = domain_size(v.domain);
    if (groundings == 0) continue;
    if (size == 0) return {0, false};
    if (size == 1) continue;
    if (overflow) {
      if (size > 1) mul(kCeiling);
      continue;
    }
    for (std::uint64_t g = 0; g < groundings && !out.saturated; ++g) mul(size);
  }
  return out;
}

}  // namespace mfr
