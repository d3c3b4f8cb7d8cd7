#include "mfr/model.hpp"

#include <sstream>

namespace mfr {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string join(const std::vector<std::string>& items, const char* sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string ground_key(const std::string& name, const std::vector<std::string>& args) {
  std::string key = name;
  key += '(';
  key += join(args, ",");
  key += ')';
  return key;
}

const char* kind_name(const Value& v) {
  switch (v.index()) {
    case 0:
      return "bool";
    case 1:
      return "int";
    default:
      return "symbol";
  }
}

}  // namespace

std::string to_string(const Value& v) {
  return std::visit(overloaded{[](bool b) -> std::string { return b ? "true" : "false"; },
                               [](std::int64_t i) { return std::to_string(i); },
                               [](const Symbol& s) { return s.name; }},
                    v);
}

bool domain_contains(const Domain& d, const Value& v) {
  return std::visit(
      overloaded{[&](const BoolDomain&) { return std::holds_alternative<bool>(v); },
                 [&](const EnumDomain& e) {
                   const auto* s = std::get_if<Symbol>(&v);
                   if (!s) return false;
                   for (const auto& m : e.members)
                     if (m == s->name) return true;
                   return false;
                 },
                 [&](const IntDomain& r) {
                   const auto* i = std::get_if<std::int64_t>(&v);
                   return i && *i >= r.lo && *i <= r.hi;
                 }},
      d);
}

std::uint64_t domain_size(const Domain& d) {
  return std::visit(overloaded{[](const BoolDomain&) -> std::uint64_t { return 2; },
                               [](const EnumDomain& e) -> std::uint64_t { return e.members.size(); },
                               [](const IntDomain& r) -> std::uint64_t {
                                 if (r.hi < r.lo) return 0;
                                 return static_cast<std::uint64_t>(r.hi) -
                                        static_cast<std::uint64_t>(r.lo) + 1;
                               }},
                    d);
}

const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq:
      return "==";
    case CmpOp::Ne:
      return "!=";
    case CmpOp::Lt:
      return "<";
    case CmpOp::Le:
      return "<=";
    case CmpOp::Gt:
      return ">";
    case CmpOp::Ge:
      return ">=";
  }
  return "?";
}

std::string to_string(const Term& t) {
  return std::visit(
      overloaded{[](const VarRef& r) { return r.name + "(" + join(r.args) + ")"; },
                 [](const NameRef& n) { return n.name; },
                 [](const IntLit& i) { return std::to_string(i.value); },
                 [](const BoolLit& b) -> std::string { return b.value ? "true" : "false"; }},
      t);
}

std::string to_string(const Comparison& c) {
  return to_string(c.lhs) + " " + to_string(c.op) + " " + to_string(c.rhs);
}

std::string to_string(const Effect& e) {
  std::string target = e.target.args.empty() ? e.target.name
                                             : e.target.name + "(" + join(e.target.args) + ")";
  return std::visit(overloaded{[&](const AssignUpdate& a) { return target + " := " + to_string(a.value); },
                               [&](const DeltaUpdate& d) {
                                 std::string op = d.delta < 0 ? " - " : " + ";
                                 std::int64_t mag = d.delta < 0 ? -d.delta : d.delta;
                                 return target + " := " + to_string(d.source) + op + std::to_string(mag);
                               }},
                    e.update);
}

std::string to_string(const GroundVar& g) {
  if (g.args.empty()) return g.name;
  return g.name + "(" + join(g.args) + ")";
}

std::string to_string(const GroundAction& a) { return a.schema + "(" + join(a.args) + ")"; }

const EntitySort* ProblemModel::find_sort(const std::string& n) const {
  for (const auto& s : sorts)
    if (s.name == n) return &s;
  return nullptr;
}

const VariableDecl* ProblemModel::find_variable(const std::string& n) const {
  for (const auto& v : variables)
    if (v.name == n) return &v;
  return nullptr;
}

const ActionSchema* ProblemModel::find_action(const std::string& n) const {
  for (const auto& a : actions)
    if (a.name == n) return &a;
  return nullptr;
}

// ---------------------------------------------------------------------------

StateLayout::StateLayout(const ProblemModel& model) {
  domain_storage_.reserve(model.variables.size());
  for (const auto& decl : model.variables) domain_storage_.push_back(decl.domain);

  for (std::size_t vi = 0; vi < model.variables.size(); ++vi) {
    const auto& decl = model.variables[vi];
    std::vector<const std::vector<std::string>*> member_lists;
    bool empty = false;
    for (const auto& sort_name : decl.params) {
      const EntitySort* sort = model.find_sort(sort_name);
      if (!sort) throw UnresolvedReference("variable " + decl.name + ": unknown sort " + sort_name);
      if (sort->members.empty()) empty = true;
      member_lists.push_back(&sort->members);
    }
    if (empty) continue;
    // Odometer over member indices, last parameter fastest.
    std::vector<std::size_t> idx(member_lists.size(), 0);
    while (true) {
      GroundVar g{decl.name, {}};
      for (std::size_t k = 0; k < idx.size(); ++k) g.args.push_back((*member_lists[k])[idx[k]]);
      index_.emplace(ground_key(g.name, g.args), vars_.size());
      vars_.push_back(std::move(g));
      domain_index_.push_back(vi);
      std::size_t k = idx.size();
      while (k > 0 && ++idx[k - 1] == member_lists[k - 1]->size()) {
        idx[k - 1] = 0;
        --k;
      }
      if (k == 0) break;
    }
  }
}

std::optional<std::size_t> StateLayout::index_of(const std::string& name,
                                                 const std::vector<std::string>& args) const {
  auto it = index_.find(ground_key(name, args));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Value& State::get(const std::string& name, const std::vector<std::string>& args) const {
  auto i = layout_ ? layout_->index_of(name, args) : std::nullopt;
  if (!i) throw UnresolvedReference("no state variable " + to_string(GroundVar{name, args}));
  return values_[*i];
}

State State::with(std::size_t i, Value v) const {
  State s = *this;
  s.values_.at(i) = std::move(v);
  return s;
}

// ---------------------------------------------------------------------------

State initial_state(const ProblemModel& model) {
  auto layout = std::make_shared<const StateLayout>(model);
  std::vector<Value> values;
  values.reserve(layout->size());
  for (std::size_t i = 0; i < layout->size(); ++i) {
    const VariableDecl* decl = model.find_variable(layout->var(i).name);
    values.push_back(decl->initial);
  }
  for (const auto& init : model.inits) {
    auto i = layout->index_of(init.variable, init.args);
    if (!i) throw UnresolvedReference("init for unknown grounding " + to_string(GroundVar{init.variable, init.args}));
    values[*i] = init.value;
  }
  return State(std::move(layout), std::move(values));
}

GroundVar ground_ref(const VarRef& ref, const Binding& binding) {
  GroundVar g{ref.name, {}};
  g.args.reserve(ref.args.size());
  for (const auto& a : ref.args) {
    auto it = binding.find(a);
    g.args.push_back(it == binding.end() ? a : it->second);
  }
  return g;
}

Value evaluate_term(const Term& term, const State& state, const Binding& binding) {
  return std::visit(
      overloaded{[&](const VarRef& r) -> Value {
                   GroundVar g = ground_ref(r, binding);
                   return state.get(g.name, g.args);
                 },
                 [&](const NameRef& n) -> Value {
                   if (auto it = binding.find(n.name); it != binding.end()) return Symbol{it->second};
                   if (auto i = state.layout().index_of(n.name, {})) return state.at(*i);
                   return Symbol{n.name};
                 },
                 [](const IntLit& i) -> Value { return i.value; },
                 [](const BoolLit& b) -> Value { return b.value; }},
      term);
}

bool evaluate_comparison(const Comparison& cmp, const State& state, const Binding& binding) {
  Value lhs = evaluate_term(cmp.lhs, state, binding);
  Value rhs = evaluate_term(cmp.rhs, state, binding);
  if (lhs.index() != rhs.index())
    throw UnresolvedReference("cannot compare " + std::string(kind_name(lhs)) + " with " +
                              kind_name(rhs) + " in `" + to_string(cmp) + "`");
  switch (cmp.op) {
    case CmpOp::Eq:
      return lhs == rhs;
    case CmpOp::Ne:
      return lhs != rhs;
    default:
      break;
  }
  const auto* a = std::get_if<std::int64_t>(&lhs);
  const auto* b = std::get_if<std::int64_t>(&rhs);
  if (!a || !b) throw UnresolvedReference("order comparison on non-integer terms in `" + to_string(cmp) + "`");
  switch (cmp.op) {
    case CmpOp::Lt:
      return *a < *b;
    case CmpOp::Le:
      return *a <= *b;
    case CmpOp::Gt:
      return *a > *b;
    case CmpOp::Ge:
      return *a >= *b;
    default:
      return false;
  }
}

bool evaluate_condition(const Condition& cond, const State& state, const Binding& binding) {
  for (const auto& c : cond)
    if (!evaluate_comparison(c, state, binding)) return false;
  return true;
}

GroundAction ground_action(const ActionSchema& schema, const std::vector<std::string>& args,
                           const ProblemModel& model) {
  if (args.size() != schema.params.size())
    throw GroundingError(GroundingErrorKind::ArityMismatch,
                         schema.name + " expects " + std::to_string(schema.params.size()) +
                             " argument(s), got " + std::to_string(args.size()));
  for (std::size_t i = 0; i < args.size(); ++i) {
    const EntitySort* sort = model.find_sort(schema.params[i].sort);
    bool member = false;
    if (sort)
      for (const auto& m : sort->members) member = member || m == args[i];
    if (!member)
      throw GroundingError(GroundingErrorKind::UndefinedEntity,
                           "`" + args[i] + "` is not a " + schema.params[i].sort + " (parameter " +
                               schema.params[i].name + " of " + schema.name + ")");
  }
  return GroundAction{schema.name, args};
}

Binding make_binding(const ActionSchema& schema, const GroundAction& action) {
  Binding b;
  for (std::size_t i = 0; i < schema.params.size() && i < action.args.size(); ++i)
    b[schema.params[i].name] = action.args[i];
  return b;
}

}  // namespace mfr
