#include <doctest.h>

#include "mfr/checker.hpp"
#include "testutil.hpp"

using namespace mfr;
using testutil::parse_ok;

namespace {

bool has_kind(const std::vector<SemanticIssue>& issues, IssueKind k) {
  return std::any_of(issues.begin(), issues.end(), [&](const SemanticIssue& i) { return i.kind == k; });
}

}  // namespace

TEST_CASE("check_model examples") {
  CHECK(check_model(parse_ok(testutil::kDemoModel)).empty());

  auto undefined = check_model(parse_ok("model \"t\"\nvar x: bool = false\ngoal done == true\n"));
  REQUIRE(undefined.size() == 1);
  CHECK(undefined[0].kind == IssueKind::UndefinedReference);
  CHECK(undefined[0].subject == "goal");

  auto out_of_domain = check_model(parse_ok("model \"t\"\nvar fuel: int[0..10] = 12\n"));
  REQUIRE(out_of_domain.size() == 1);
  CHECK(out_of_domain[0].kind == IssueKind::InitialOutOfDomain);
}

TEST_CASE("check_model: individual rules") {
  SUBCASE("duplicate names") {
    auto issues = check_model(parse_ok("model \"t\"\nentity s: a, a\nvar v: bool = false\nvar v: bool = true\n"));
    CHECK(std::count_if(issues.begin(), issues.end(),
                        [](const SemanticIssue& i) { return i.kind == IssueKind::DuplicateName; }) == 2);
  }
  SUBCASE("type mismatch between bool and int") {
    auto issues = check_model(parse_ok("model \"t\"\nvar v: bool = false\ngoal v == 3\n"));
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].kind == IssueKind::TypeMismatch);
  }
  SUBCASE("ordering on a symbol is a type mismatch") {
    auto issues = check_model(parse_ok("model \"t\"\nvar c: {r, g} = r\nconstraint always c < g\n"));
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].kind == IssueKind::TypeMismatch);
    CHECK(issues[0].subject == "constraint");
  }
  SUBCASE("known symbol outside the variable's domain in the goal") {
    auto issues = check_model(parse_ok("model \"t\"\nentity s: far\nvar c: {r, g} = r\ngoal c == far\n"));
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].kind == IssueKind::UnreachableGoalSymbol);
  }
  SUBCASE("conflicting effects") {
    auto issues = check_model(parse_ok("model \"t\"\nvar v: int[0..3] = 0\naction a()\n  eff v := 1\n  eff v := v + 1\n"));
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].kind == IssueKind::ConflictingEffects);
    CHECK(issues[0].subject == "action.a");
  }
  SUBCASE("delta on a non-integer variable") {
    auto issues = check_model(parse_ok("model \"t\"\nvar v: bool = false\naction a()\n  eff v := v + 1\n"));
    CHECK(has_kind(issues, IssueKind::TypeMismatch));
  }
  SUBCASE("parameter assigned into a narrower enumeration") {
    auto issues = check_model(parse_ok(
        "model \"t\"\nentity s: a, b, z\nvar v: {a, b} = a\naction set(x: s)\n  eff v := x\n"));
    CHECK(has_kind(issues, IssueKind::TypeMismatch));
  }
  SUBCASE("unknown sort in a parameter and a variable") {
    auto issues = check_model(parse_ok("model \"t\"\nvar v(ghost): bool = false\naction a(x: phantom)\n"));
    CHECK(std::count_if(issues.begin(), issues.end(),
                        [](const SemanticIssue& i) { return i.kind == IssueKind::UndefinedReference; }) == 2);
  }
  SUBCASE("init override on an unknown member") {
    auto issues = check_model(parse_ok("model \"t\"\nentity s: a\nvar v(s): bool = false\ninit v(b) = true\n"));
    CHECK(has_kind(issues, IssueKind::UndefinedReference));
  }
}

TEST_CASE("check_model is idempotent and clean models admit an initial state") {
  for (const auto& id : list_tasks(testutil::corpus_root())) {
    Task t = load_task(id, testutil::corpus_root());
    auto first = check_model(t.reference_model);
    CHECK(first == check_model(t.reference_model));
    CHECK(first.empty());
    CHECK_NOTHROW(initial_state(t.reference_model));
  }
}

TEST_CASE("injecting one defect of each kind yields an issue of that kind") {
  for (const auto& id : list_tasks(testutil::corpus_root())) {
    Task t = load_task(id, testutil::corpus_root());
    const ProblemModel& clean = t.reference_model;
    INFO(id);

    ProblemModel dup = clean;
    dup.variables.push_back(dup.variables.front());
    CHECK(has_kind(check_model(dup), IssueKind::DuplicateName));

    ProblemModel undef = clean;
    undef.goal.push_back({NameRef{"ghost_var"}, CmpOp::Eq, BoolLit{true}, {}});
    CHECK(has_kind(check_model(undef), IssueKind::UndefinedReference));

    ProblemModel mismatch = clean;
    const VariableDecl& v0 = mismatch.variables.front();
    VarRef ref{v0.name, {}};
    for (const auto& p : v0.params) ref.args.push_back(clean.find_sort(p)->members.front());
    Term wrong = std::holds_alternative<BoolDomain>(v0.domain) ? Term{IntLit{3}} : Term{BoolLit{true}};
    mismatch.goal.push_back({ref, CmpOp::Eq, wrong, {}});
    CHECK(has_kind(check_model(mismatch), IssueKind::TypeMismatch));

    ProblemModel range = clean;
    bool injected = false;
    for (auto& v : range.variables)
      if (auto* d = std::get_if<IntDomain>(&v.domain)) {
        v.initial = d->hi + 1;
        injected = true;
        break;
      }
    if (!injected) range.variables.front().initial = Symbol{"nowhere"};
    CHECK(has_kind(check_model(range), IssueKind::InitialOutOfDomain));

    ProblemModel unreachable = clean;
    unreachable.sorts.push_back({"extra_sort", {"far_away"}, {}});
    unreachable.variables.push_back({"extra_var", {}, EnumDomain{{"near"}}, Symbol{"near"}, {}});
    unreachable.goal.push_back({NameRef{"extra_var"}, CmpOp::Eq, NameRef{"far_away"}, {}});
    CHECK(has_kind(check_model(unreachable), IssueKind::UnreachableGoalSymbol));

    ProblemModel conflict = clean;
    auto with_effect = std::find_if(conflict.actions.begin(), conflict.actions.end(),
                                    [](const ActionSchema& a) { return !a.effects.empty(); });
    REQUIRE(with_effect != conflict.actions.end());
    with_effect->effects.push_back(with_effect->effects.front());
    CHECK(has_kind(check_model(conflict), IssueKind::ConflictingEffects));
  }
}

TEST_CASE("state_space_size") {
  CHECK(state_space_size(parse_ok(testutil::kDemoModel)).value == 44);
  CHECK(state_space_size(parse_ok("model \"t\"\nvar b: bool = false\n")).value == 2);
  // med1: at 2 * carrying 3 * doses 3 * cooldown 4 * slot 9
  Task med1 = load_task("med1", testutil::corpus_root());
  CHECK(state_space_size(med1.reference_model).value == 648);
  auto huge = state_space_size(parse_ok(
      "model \"t\"\nentity s: a, b, c, d, e, f, g, h\nvar x(s, s): int[0..1000000] = 0\n"));
  CHECK(huge.saturated);
}

TEST_CASE("format_issue") {
  auto issues = check_model(parse_ok("model \"t\"\nvar x: bool = false\ngoal done == true\n"));
  REQUIRE(issues.size() == 1);
  CHECK(format_issue(issues[0]).rfind("3:undefined-reference:goal:", 0) == 0);
}
