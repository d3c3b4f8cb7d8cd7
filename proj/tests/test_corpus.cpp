#include <doctest.h>

#include <map>
#include <set>

#include "mfr/checker.hpp"
#include "mfr/corpus.hpp"
#include "mfr/oracle.hpp"
#include "testutil.hpp"

using namespace mfr;

TEST_CASE("list_tasks: at least ten tasks, two per family, stable order") {
  auto ids = list_tasks(testutil::corpus_root());
  CHECK(ids.size() >= 10);
  CHECK(ids == list_tasks(testutil::corpus_root()));
  std::map<TaskFamily, int> per_family;
  for (const auto& id : ids) ++per_family[load_task(id, testutil::corpus_root()).family];
  CHECK(per_family.size() == 5);
  for (const auto& [family, n] : per_family) CHECK(n >= 2);
}

TEST_CASE("load_task: unknown id") {
  CHECK_THROWS_AS(load_task("nope", testutil::corpus_root()), UnknownTask);
  CHECK_THROWS_AS(list_tasks("/definitely/not/a/corpus"), CorpusError);
}

TEST_CASE("medication task encodes a minimum gap between doses") {
  Task t = load_task("med1", testutil::corpus_root());
  CHECK(t.family == TaskFamily::MedicationScheduling);
  CHECK(t.reference_model.find_variable("doses") != nullptr);
  CHECK(t.reference_model.find_variable("slot") != nullptr);
  CHECK_FALSE(t.reference_model.constraints.empty());
  CHECK_FALSE(t.nl_description.empty());
}

TEST_CASE("corpus health") {
  for (const auto& id : list_tasks(testutil::corpus_root())) {
    Task t = load_task(id, testutil::corpus_root());
    INFO(id);
    auto failures = corpus_invariant_failures(t);
    for (const auto& f : failures) MESSAGE(f);
    CHECK(failures.empty());
    auto solved = solve(t.reference_model, 12);
    REQUIRE(solved.plan.has_value());
    CHECK(solved.plan->steps.size() == t.reference_plan.steps.size());
  }
}

TEST_CASE("mutant coverage: every class appears, and each family has a goal-unmet mutant") {
  std::set<ViolationClass> seen;
  std::map<TaskFamily, bool> goal_unmet;
  for (const auto& id : list_tasks(testutil::corpus_root())) {
    Task t = load_task(id, testutil::corpus_root());
    for (const auto& m : t.mutants) {
      seen.insert(m.expected);
      if (m.expected == ViolationClass::GoalUnmet) {
        // valid up to the goal check
        auto r = validate_plan(t.reference_model, m.plan, ValidationMode::ContinueAndSkip);
        bool only_goal = std::all_of(r.violations.begin(), r.violations.end(),
                                     [](const Violation& v) { return v.cls == ViolationClass::GoalUnmet; });
        CHECK(only_goal);
        goal_unmet[t.family] = goal_unmet[t.family] || only_goal;
      }
    }
  }
  CHECK(seen.size() == 8);
  CHECK(goal_unmet.size() == 5);
  for (const auto& [family, ok] : goal_unmet) CHECK(ok);
}
