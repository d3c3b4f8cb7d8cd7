#include "mfr/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>

#include "mfr/checker.hpp"

namespace mfr {

namespace {

using Vec = std::vector<std::int64_t>;

struct VecHash {
  std::size_t operator()(const Vec& v) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (auto x : v) {
      h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

enum class VKind { Bool, Int, Sym };

struct Slot {
  VKind kind = VKind::Bool;
  std::int64_t lo = 0, hi = 1;
  std::vector<std::int64_t> allowed;  // Sym: sorted symbol ids
};

struct Operand {
  bool is_var = false;
  std::int64_t value = 0;  // slot index or constant
  VKind kind = VKind::Bool;
};

struct Check {
  Operand lhs, rhs;
  CmpOp op = CmpOp::Eq;
  std::string text;
};

struct Write {
  std::size_t slot = 0;
  Operand source;
  bool delta = false;
  std::int64_t amount = 0;
};

struct Ground {
  ParsedStep step;
  std::vector<std::size_t> member_pos;
  std::vector<Check> pre;
  std::vector<Write> writes;
  std::optional<std::string> defect;  // compile-time failure: every application rejects
};

/// Integer-coded compilation of a model.
class Compiled {
 public:
  explicit Compiled(const ProblemModel& m) : model_(m) {
    compile_slots();
    compile_initial();
    global_defect_ = compile_conditions(m.constraints, {}, constraints_);
    if (!global_defect_) global_defect_ = compile_conditions(m.goal, {}, goal_);
    compile_actions();
  }

  const std::optional<std::string>& global_defect() const { return global_defect_; }
  const std::optional<std::string>& initial_defect() const { return initial_defect_; }
  const Vec& initial() const { return initial_; }
  const std::vector<Ground>& actions() const { return actions_; }

  std::optional<std::size_t> find_ground(const std::string& name, const std::vector<std::string>& args) const {
    auto it = ground_index_.find(key(name, args));
    if (it == ground_index_.end()) return std::nullopt;
    return it->second;
  }

  /// First failing constraint, if any.
  std::optional<std::string> broken_constraint(const Vec& s) const {
    for (const auto& c : constraints_)
      if (!holds(c, s)) return "constraint `" + c.text + "` violated";
    return std::nullopt;
  }

  bool goal_holds(const Vec& s) const {
    for (const auto& c : goal_)
      if (!holds(c, s)) return false;
    return true;
  }

  /// Successor of `s` under `g`, or the reason it cannot be applied.
  std::variant<Vec, std::string> apply(const Ground& g, const Vec& s) const {
    if (g.defect) return *g.defect;
    for (const auto& c : g.pre)
      if (!holds(c, s)) return "precondition `" + c.text + "` false";
    Vec next = s;
    std::vector<bool> written(s.size(), false);
    for (const auto& w : g.writes) {
      std::int64_t v = read(w.source, s);
      if (w.delta && __builtin_add_overflow(v, w.amount, &v)) return std::string("integer overflow");
      if (!admits(slots_[w.slot], v)) return "value out of domain for " + slot_names_[w.slot];
      if (written[w.slot]) return "double write to " + slot_names_[w.slot];
      written[w.slot] = true;
      next[w.slot] = v;
    }
    return next;
  }

 private:
  static std::string key(const std::string& name, const std::vector<std::string>& args) {
    std::string k = name;
    for (const auto& a : args) k += "\x1f" + a;
    return k;
  }

  std::int64_t intern(const std::string& s) {
    auto [it, inserted] = symbols_.emplace(s, static_cast<std::int64_t>(symbols_.size()));
    return it->second;
  }

  void compile_slots() {
    for (const auto& decl : model_.variables) {
      Slot slot;
      if (std::holds_alternative<BoolDomain>(decl.domain)) {
        slot.kind = VKind::Bool;
      } else if (const auto* r = std::get_if<IntDomain>(&decl.domain)) {
        slot.kind = VKind::Int;
        slot.lo = r->lo;
        slot.hi = r->hi;
      } else {
        slot.kind = VKind::Sym;
        for (const auto& m : std::get<EnumDomain>(decl.domain).members) slot.allowed.push_back(intern(m));
        std::sort(slot.allowed.begin(), slot.allowed.end());
      }
      // Cartesian groundings, last parameter fastest.
      std::vector<std::vector<std::string>> combos{{}};
      for (const auto& sort_name : decl.params) {
        std::vector<std::vector<std::string>> grown;
        for (const EntitySort& s : model_.sorts)
          if (s.name == sort_name) {
            for (const auto& c : combos)
              for (const auto& m : s.members) {
                grown.push_back(c);
                grown.back().push_back(m);
              }
            break;
          }
        combos = std::move(grown);
      }
      for (auto& args : combos) {
        std::string k = key(decl.name, args);
        if (slot_index_.count(k)) continue;
        slot_index_[k] = slots_.size();
        std::string label = decl.name;
        if (!args.empty()) {
          label += "(";
          for (std::size_t i = 0; i < args.size(); ++i) label += (i ? ", " : "") + args[i];
          label += ")";
        }
        slot_names_.push_back(label);
        slots_.push_back(slot);
        slot_decl_.push_back(&decl);
      }
    }
  }

  std::optional<std::int64_t> encode(const Value& v, const Slot& slot) {
    if (const auto* b = std::get_if<bool>(&v)) {
      if (slot.kind != VKind::Bool) return std::nullopt;
      return *b ? 1 : 0;
    }
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
      if (slot.kind != VKind::Int) return std::nullopt;
      return *i;
    }
    if (slot.kind != VKind::Sym) return std::nullopt;
    return intern(std::get<Symbol>(v).name);
  }

  void compile_initial() {
    initial_.assign(slots_.size(), 0);
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      auto v = encode(slot_decl_[i]->initial, slots_[i]);
      if (!v || !admits(slots_[i], *v)) initial_defect_ = "initial value of " + slot_names_[i] + " out of domain";
      if (v) initial_[i] = *v;
    }
    for (const auto& init : model_.inits) {
      auto it = slot_index_.find(key(init.variable, init.args));
      if (it == slot_index_.end()) {
        initial_defect_ = "init for unknown variable " + init.variable;
        continue;
      }
      auto v = encode(init.value, slots_[it->second]);
      if (!v || !admits(slots_[it->second], *v)) {
        initial_defect_ = "init value out of domain for " + slot_names_[it->second];
        continue;
      }
      initial_[it->second] = *v;
    }
  }

  using Params = std::map<std::string, std::string>;

  std::optional<Operand> slot_operand(const std::string& name, const std::vector<std::string>& args,
                                      const Params& params) {
    std::vector<std::string> concrete;
    for (const auto& a : args) {
      auto p = params.find(a);
      concrete.push_back(p == params.end() ? a : p->second);
    }
    auto it = slot_index_.find(key(name, concrete));
    if (it == slot_index_.end()) return std::nullopt;
    return Operand{true, static_cast<std::int64_t>(it->second), slots_[it->second].kind};
  }

  std::optional<Operand> operand(const Term& t, const Params& params) {
    if (const auto* r = std::get_if<VarRef>(&t)) return slot_operand(r->name, r->args, params);
    if (const auto* n = std::get_if<NameRef>(&t)) {
      if (auto p = params.find(n->name); p != params.end()) return Operand{false, intern(p->second), VKind::Sym};
      if (auto op = slot_operand(n->name, {}, params)) return op;
      return Operand{false, intern(n->name), VKind::Sym};
    }
    if (const auto* i = std::get_if<IntLit>(&t)) return Operand{false, i->value, VKind::Int};
    return Operand{false, std::get<BoolLit>(t).value ? 1 : 0, VKind::Bool};
  }

  std::optional<std::string> compile_conditions(const Condition& cond, const Params& params,
                                                std::vector<Check>& out) {
    for (const auto& c : cond) {
      auto l = operand(c.lhs, params);
      auto r = operand(c.rhs, params);
      std::string text = to_string(c);
      if (!l || !r) return "unresolvable term in `" + text + "`";
      if (l->kind != r->kind) return "ill-typed comparison `" + text + "`";
      if (c.op != CmpOp::Eq && c.op != CmpOp::Ne && l->kind != VKind::Int)
        return "order comparison on non-integers `" + text + "`";
      out.push_back({*l, *r, c.op, text});
    }
    return std::nullopt;
  }

  void compile_actions() {
    for (const auto& schema : model_.actions) {
      if (model_.find_action(schema.name) != &schema) continue;  // shadowed duplicate
      std::vector<const EntitySort*> sorts;
      bool missing = false;
      for (const auto& p : schema.params) {
        const EntitySort* s = model_.find_sort(p.sort);
        missing = missing || !s;
        sorts.push_back(s);
      }
      if (missing) continue;
      std::vector<std::vector<std::size_t>> combos{{}};
      for (const EntitySort* s : sorts) {
        std::vector<std::vector<std::size_t>> grown;
        for (const auto& c : combos)
          for (std::size_t m = 0; m < s->members.size(); ++m) {
            grown.push_back(c);
            grown.back().push_back(m);
          }
        combos = std::move(grown);
      }
      for (const auto& combo : combos) {
        Ground g;
        g.step.action = schema.name;
        g.member_pos = combo;
        Params params;
        for (std::size_t i = 0; i < combo.size(); ++i) {
          g.step.args.push_back(sorts[i]->members[combo[i]]);
          params[schema.params[i].name] = g.step.args.back();
        }
        g.defect = compile_conditions(schema.preconditions, params, g.pre);
        for (const auto& eff : schema.effects) {
          if (g.defect) break;
          auto target = slot_operand(eff.target.name, eff.target.args, params);
          if (!target) {
            g.defect = "unresolvable effect target " + eff.target.name;
            break;
          }
          Write w;
          w.slot = static_cast<std::size_t>(target->value);
          std::optional<Operand> src;
          if (const auto* a = std::get_if<AssignUpdate>(&eff.update)) {
            src = operand(a->value, params);
          } else {
            const auto& d = std::get<DeltaUpdate>(eff.update);
            src = operand(d.source, params);
            w.delta = true;
            w.amount = d.delta;
            if (src && src->kind != VKind::Int) g.defect = "delta on non-integer";
          }
          if (!src) g.defect = "unresolvable effect value";
          else if (src->kind != slots_[w.slot].kind) g.defect = "ill-typed effect";
          if (g.defect) break;
          w.source = *src;
          g.writes.push_back(w);
        }
        actions_.push_back(std::move(g));
      }
    }
    std::stable_sort(actions_.begin(), actions_.end(), [](const Ground& a, const Ground& b) {
      if (a.step.action != b.step.action) return a.step.action < b.step.action;
      return a.member_pos < b.member_pos;
    });
    for (std::size_t i = 0; i < actions_.size(); ++i)
      ground_index_.emplace(key(actions_[i].step.action, actions_[i].step.args), i);
  }

  static bool admits(const Slot& slot, std::int64_t v) {
    switch (slot.kind) {
      case VKind::Bool:
        return v == 0 || v == 1;
      case VKind::Int:
        return v >= slot.lo && v <= slot.hi;
      case VKind::Sym:
        return std::binary_search(slot.allowed.begin(), slot.allowed.end(), v);
    }
    return false;
  }

  static std::int64_t read(const Operand& o, const Vec& s) {
    return o.is_var ? s[static_cast<std::size_t>(o.value)] : o.value;
  }

  static bool holds(const Check& c, const Vec& s) {
    std::int64_t a = read(c.lhs, s), b = read(c.rhs, s);
    switch (c.op) {
      case CmpOp::Eq:
        return a == b;
      case CmpOp::Ne:
        return a != b;
      case CmpOp::Lt:
        return a < b;
      case CmpOp::Le:
        return a <= b;
      case CmpOp::Gt:
        return a > b;
      case CmpOp::Ge:
        return a >= b;
    }
    return false;
  }

  const ProblemModel& model_;
  std::unordered_map<std::string, std::int64_t> symbols_;
  std::unordered_map<std::string, std::size_t> slot_index_;
  std::vector<Slot> slots_;
  std::vector<std::string> slot_names_;
  std::vector<const VariableDecl*> slot_decl_;
  Vec initial_;
  std::optional<std::string> initial_defect_;
  std::optional<std::string> global_defect_;
  std::vector<Check> constraints_;
  std::vector<Check> goal_;
  std::vector<Ground> actions_;
  std::unordered_map<std::string, std::size_t> ground_index_;
};

void check_size(const ProblemModel& model, const SearchLimits& limits) {
  auto size = state_space_size(model);
  if (size.saturated || size.value > limits.max_state_space)
    throw CeilingExceeded("state space " + (size.saturated ? std::string(">= 2^63") : std::to_string(size.value)) +
                          " exceeds ceiling " + std::to_string(limits.max_state_space));
}

bool usable_start(const Compiled& c) {
  return !c.global_defect() && !c.initial_defect() && !c.broken_constraint(c.initial());
}

}  // namespace

std::vector<ParsedStep> ground_actions(const ProblemModel& model) {
  Compiled c(model);
  std::vector<ParsedStep> out;
  for (const auto& g : c.actions()) out.push_back(g.step);
  return out;
}

SolveResult solve(const ProblemModel& model, int max_depth, const SearchLimits& limits, std::stop_token cancel) {
  check_size(model, limits);
  Compiled c(model);
  SolveResult result;
  if (!usable_start(c)) return result;

  struct Node {
    Vec state;
    std::int64_t parent;
    std::size_t action;
    int depth;
  };
  std::vector<Node> nodes;
  std::unordered_map<Vec, std::size_t, VecHash> seen;
  nodes.push_back({c.initial(), -1, 0, 0});
  seen.emplace(c.initial(), 0);

  for (std::size_t head = 0; head < nodes.size(); ++head) {
    if ((head & 1023) == 0 && cancel.stop_requested()) throw SearchCancelled();
    result.stats.frontier_peak = std::max<std::uint64_t>(result.stats.frontier_peak, nodes.size() - head);
    const int depth = nodes[head].depth;
    result.stats.depth_reached = std::max(result.stats.depth_reached, depth);
    if (c.goal_holds(nodes[head].state)) {
      std::vector<ParsedStep> steps;
      for (auto i = static_cast<std::int64_t>(head); nodes[i].parent >= 0; i = nodes[i].parent)
        steps.push_back(c.actions()[nodes[i].action].step);
      std::reverse(steps.begin(), steps.end());
      result.plan = make_plan(steps);
      return result;
    }
    if (depth >= max_depth) continue;
    ++result.stats.states_expanded;
    for (std::size_t a = 0; a < c.actions().size(); ++a) {
      auto next = c.apply(c.actions()[a], nodes[head].state);
      auto* s = std::get_if<Vec>(&next);
      if (!s || c.broken_constraint(*s) || seen.count(*s)) continue;
      seen.emplace(*s, nodes.size());
      nodes.push_back({std::move(*s), static_cast<std::int64_t>(head), a, depth + 1});
      if (nodes.size() - head > limits.max_frontier)
        throw CeilingExceeded("frontier exceeds ceiling " + std::to_string(limits.max_frontier));
    }
  }
  return result;
}

std::vector<Plan> enumerate_valid_plans(const ProblemModel& model, int depth, const SearchLimits& limits,
                                        std::stop_token cancel) {
  if (depth < 0 || depth > 8) throw std::invalid_argument("exact depth must be within [0, 8]");
  check_size(model, limits);
  Compiled c(model);
  std::vector<Plan> plans;
  if (!usable_start(c)) return plans;

  std::vector<std::size_t> path;
  std::uint64_t visits = 0;
  std::function<void(const Vec&)> dfs = [&](const Vec& s) {
    if ((++visits & 1023) == 0 && cancel.stop_requested()) throw SearchCancelled();
    if (static_cast<int>(path.size()) == depth) {
      if (plans.size() >= limits.max_plans)
        throw CeilingExceeded("more than " + std::to_string(limits.max_plans) + " plans");
      std::vector<ParsedStep> steps;
      for (auto a : path) steps.push_back(c.actions()[a].step);
      plans.push_back(make_plan(steps));
      return;
    }
    for (std::size_t a = 0; a < c.actions().size(); ++a) {
      auto next = c.apply(c.actions()[a], s);
      auto* n = std::get_if<Vec>(&next);
      if (!n || c.broken_constraint(*n)) continue;
      path.push_back(a);
      dfs(*n);
      path.pop_back();
    }
  };
  dfs(c.initial());
  return plans;
}

ReferenceVerdict execute_reference(const ProblemModel& model, const Plan& plan) {
  Compiled c(model);
  if (c.global_defect()) return {false, *c.global_defect()};
  if (c.initial_defect()) return {false, *c.initial_defect()};
  Vec s = c.initial();
  if (auto broken = c.broken_constraint(s)) return {false, "initial state: " + *broken};
  for (const auto& step : plan.steps) {
    std::string at = "step " + std::to_string(step.index) + ": ";
    if (!step.parsed) return {false, at + "unparseable"};
    const ActionSchema* schema = nullptr;
    for (const auto& a : model.actions)
      if (a.name == step.parsed->action) {
        schema = &a;
        break;
      }
    if (!schema) return {false, at + "unknown action " + step.parsed->action};
    if (schema->params.size() != step.parsed->args.size()) return {false, at + "wrong number of arguments"};
    for (std::size_t i = 0; i < schema->params.size(); ++i) {
      const auto* sort = model.find_sort(schema->params[i].sort);
      if (!sort || std::find(sort->members.begin(), sort->members.end(), step.parsed->args[i]) == sort->members.end())
        return {false, at + "argument " + step.parsed->args[i] + " not in sort " + schema->params[i].sort};
    }
    auto g = c.find_ground(step.parsed->action, step.parsed->args);
    if (!g) return {false, at + "no such grounding"};
    auto next = c.apply(c.actions()[*g], s);
    if (auto* why = std::get_if<std::string>(&next)) return {false, at + *why};
    s = std::get<Vec>(std::move(next));
    if (auto broken = c.broken_constraint(s)) return {false, at + *broken};
  }
  if (!c.goal_holds(s)) return {false, "goal not reached"};
  return {true, ""};
}

}  // namespace mfr
