#include "mfr/validator.hpp"

#include <array>
#include <sstream>

namespace mfr {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::array<std::pair<ViolationClass, const char*>, 8> kClassNames{{
    {ViolationClass::UnparsedStep, "UnparsedStep"},
    {ViolationClass::UndefinedAction, "UndefinedAction"},
    {ViolationClass::ArityMismatch, "ArityMismatch"},
    {ViolationClass::UndefinedEntity, "UndefinedEntity"},
    {ViolationClass::PreconditionFailure, "PreconditionFailure"},
    {ViolationClass::ConstraintViolation, "ConstraintViolation"},
    {ViolationClass::TypeError, "TypeError"},
    {ViolationClass::GoalUnmet, "GoalUnmet"},
}};

Violation violation(ViolationClass cls, std::string detail) { return Violation{0, cls, std::move(detail)}; }

std::string domain_text(const Domain& d) {
  return std::visit(overloaded{[](const BoolDomain&) -> std::string { return "bool"; },
                               [](const EnumDomain& e) {
                                 std::string s = "{";
                                 for (std::size_t i = 0; i < e.members.size(); ++i)
                                   s += (i ? ", " : "") + e.members[i];
                                 return s + "}";
                               },
                               [](const IntDomain& r) {
                                 return "int[" + std::to_string(r.lo) + ".." + std::to_string(r.hi) + "]";
                               }},
                    d);
}

}  // namespace

const char* to_string(ViolationClass c) {
  for (const auto& [cls, name] : kClassNames)
    if (cls == c) return name;
  return "?";
}

std::optional<ViolationClass> violation_class_from_string(std::string_view s) {
  for (const auto& [cls, name] : kClassNames)
    if (s == name) return cls;
  return std::nullopt;
}

std::variant<State, Violation> apply_step(const State& state, const GroundAction& action,
                                          const ProblemModel& model) {
  const ActionSchema* schema = model.find_action(action.schema);
  if (!schema) return violation(ViolationClass::UndefinedAction, "no action named '" + action.schema + "'");
  Binding binding = make_binding(*schema, action);

  for (const auto& pre : schema->preconditions) {
    try {
      if (!evaluate_comparison(pre, state, binding))
        return violation(ViolationClass::PreconditionFailure, "`" + to_string(pre) + "` is false");
    } catch (const UnresolvedReference& e) {
      return violation(ViolationClass::TypeError, e.what());
    }
  }

  std::vector<std::pair<std::size_t, Value>> writes;
  writes.reserve(schema->effects.size());
  for (const auto& eff : schema->effects) {
    GroundVar target = ground_ref(eff.target, binding);
    auto index = state.layout().index_of(target.name, target.args);
    if (!index) return violation(ViolationClass::TypeError, "effect target " + to_string(target) + " does not exist");
    Value next;
    try {
      next = std::visit(overloaded{[&](const AssignUpdate& u) { return evaluate_term(u.value, state, binding); },
                                   [&](const DeltaUpdate& u) -> Value {
                                     Value src = evaluate_term(u.source, state, binding);
                                     const auto* i = std::get_if<std::int64_t>(&src);
                                     if (!i) throw UnresolvedReference("integer delta on non-integer " + to_string(src));
                                     std::int64_t r = 0;
                                     if (__builtin_add_overflow(*i, u.delta, &r))
                                       throw UnresolvedReference("integer overflow in `" + to_string(eff) + "`");
                                     return r;
                                   }},
                        eff.update);
    } catch (const UnresolvedReference& e) {
      return violation(ViolationClass::TypeError, e.what());
    }
    const Domain& domain = state.layout().domain(*index);
    if (!domain_contains(domain, next))
      return violation(ViolationClass::TypeError, "`" + to_string(eff) + "` would set " + to_string(target) + " to " +
                                                      to_string(next) + ", outside " + domain_text(domain));
    for (const auto& [i, _] : writes)
      if (i == *index)
        return violation(ViolationClass::TypeError, "two effects write " + to_string(target) + " in one step");
    writes.emplace_back(*index, std::move(next));
  }

  std::vector<Value> values = state.values();
  for (auto& [i, v] : writes) values[i] = std::move(v);
  return State(state.layout_ptr(), std::move(values));
}

std::vector<Violation> check_constraints(const State& state, const ProblemModel& model, int step_index) {
  std::vector<Violation> out;
  for (const auto& c : model.constraints) {
    try {
      if (!evaluate_comparison(c, state, {}))
        out.push_back({step_index, ViolationClass::ConstraintViolation, "`always " + to_string(c) + "` is false"});
    } catch (const UnresolvedReference& e) {
      out.push_back({step_index, ViolationClass::TypeError, e.what()});
    }
  }
  return out;
}

std::variant<State, std::vector<Violation>> execute_step(const State& state, const PlanStep& step,
                                                         const ProblemModel& model) {
  auto fail = [&](ViolationClass cls, std::string detail) {
    return std::vector<Violation>{{step.index, cls, std::move(detail)}};
  };
  if (!step.parsed) return fail(ViolationClass::UnparsedStep, "cannot parse `" + step.raw + "`");
  const ActionSchema* schema = model.find_action(step.parsed->action);
  if (!schema) return fail(ViolationClass::UndefinedAction, "no action named '" + step.parsed->action + "'");
  GroundAction action;
  try {
    action = ground_action(*schema, step.parsed->args, model);
  } catch (const GroundingError& e) {
    return fail(e.kind() == GroundingErrorKind::ArityMismatch ? ViolationClass::ArityMismatch
                                                               : ViolationClass::UndefinedEntity,
                e.what());
  }
  auto applied = apply_step(state, action, model);
  if (auto* v = std::get_if<Violation>(&applied)) {
    v->step_index = step.index;
    v->detail = to_string(action) + ": " + v->detail;
    return std::vector<Violation>{std::move(*v)};
  }
  State next = std::get<State>(std::move(applied));
  auto broken = check_constraints(next, model, step.index);
  if (!broken.empty()) return broken;
  return next;
}

ValidationReport validate_plan(const ProblemModel& model, const Plan& plan, ValidationMode mode) {
  ValidationReport report;
  report.plan_length = static_cast<int>(plan.steps.size());
  State current = initial_state(model);
  report.states.push_back(current);
  report.state_steps.push_back(0);

  auto initial = check_constraints(current, model, 0);
  if (!initial.empty()) {
    report.violations = initial;
    if (mode == ValidationMode::HaltOnFirst) {
      report.halted_at = 0;
      return report;
    }
  }

  for (const auto& step : plan.steps) {
    auto result = execute_step(current, step, model);
    if (auto* vs = std::get_if<std::vector<Violation>>(&result)) {
      report.violations.insert(report.violations.end(), vs->begin(), vs->end());
      if (mode == ValidationMode::HaltOnFirst) {
        report.halted_at = step.index;
        return report;
      }
      continue;
    }
    current = std::get<State>(std::move(result));
    report.states.push_back(current);
    report.state_steps.push_back(step.index);
  }

  report.goal_satisfied = true;
  for (const auto& g : model.goal) {
    bool holds = false;
    try {
      holds = evaluate_comparison(g, current, {});
    } catch (const UnresolvedReference& e) {
      report.violations.push_back({report.plan_length, ViolationClass::TypeError, e.what()});
    }
    if (!holds) {
      report.goal_satisfied = false;
      report.violations.push_back({report.plan_length, ViolationClass::GoalUnmet, "`" + to_string(g) + "` is false"});
    }
  }
  return report;
}

std::vector<std::string> describe_changes(const State& before, const State& after) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < after.size() && i < before.size(); ++i)
    if (!(before.at(i) == after.at(i)))
      out.push_back(to_string(after.layout().var(i)) + ": " + to_string(before.at(i)) + " -> " + to_string(after.at(i)));
  return out;
}

std::string trace_render(const ValidationReport& report, const ProblemModel& model, const Plan& plan) {
  std::ostringstream out;
  out << "model: " << model.name << "\n";
  if (!report.states.empty()) {
    const State& s0 = report.states.front();
    out << "initial:";
    for (std::size_t i = 0; i < s0.size(); ++i)
      out << (i ? ", " : " ") << to_string(s0.layout().var(i)) << "=" << to_string(s0.at(i));
    out << "\n";
  }
  auto print_violations = [&](int step) {
    bool any = false;
    for (const auto& v : report.violations)
      if (v.step_index == step && v.cls != ViolationClass::GoalUnmet) {
        out << "step " << step << ": VIOLATION " << to_string(v.cls) << " " << v.detail << "\n";
        any = true;
      }
    return any;
  };
  print_violations(0);

  int last = report.halted_at ? *report.halted_at : report.plan_length;
  std::size_t state_pos = 1;
  for (int step = 1; step <= last; ++step) {
    if (print_violations(step)) continue;
    std::string label = "ok";
    if (step - 1 < static_cast<int>(plan.steps.size())) {
      const PlanStep& ps = plan.steps[step - 1];
      if (ps.parsed) {
        label = ps.parsed->action + "(";
        for (std::size_t i = 0; i < ps.parsed->args.size(); ++i) label += (i ? ", " : "") + ps.parsed->args[i];
        label += ")";
      } else {
        label = ps.raw;
        if (auto p = label.find_first_not_of(" \t"); p != std::string::npos) label = label.substr(p);
      }
    }
    out << "step " << step << ": " << label << "\n";
    if (state_pos < report.states.size() && report.state_steps[state_pos] == step) {
      auto changes = describe_changes(report.states[state_pos - 1], report.states[state_pos]);
      if (changes.empty()) out << "  (no change)\n";
      for (const auto& c : changes) out << "  " << c << "\n";
      ++state_pos;
    }
  }

  if (report.halted_at) {
    out << "HALTED at step " << *report.halted_at << "\n";
    out << "GOAL: not evaluated\n";
  } else if (report.goal_satisfied) {
    out << "GOAL: satisfied\n";
  } else {
    for (const auto& v : report.violations)
      if (v.cls == ViolationClass::GoalUnmet) out << "GOAL: unmet " << v.detail << "\n";
  }
  return out.str();
}

}  // namespace mfr
