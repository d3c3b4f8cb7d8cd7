#include <doctest.h>

#include <random>

#include "mfr/mdl.hpp"
#include "testutil.hpp"

using namespace mfr;
using testutil::parse_ok;

TEST_CASE("parse_model: demo example") {
  auto m = parse_ok(testutil::kDemoModel);
  CHECK(m.name == "demo");
  CHECK(m.sorts.size() == 2);
  CHECK(m.variables.size() == 3);
  CHECK(m.actions.size() == 1);
  CHECK(m.constraints.size() == 1);
  CHECK(m.goal.size() == 1);
  CHECK(m.actions[0].params.size() == 3);
  CHECK(m.actions[0].preconditions.size() == 1);
  CHECK(m.actions[0].effects.size() == 1);
}

TEST_CASE("parse_model: unclosed parameter list") {
  ParseResult r = parse_model("action move(");
  REQUIRE_FALSE(r.ok());
  CHECK(r.issues().front().line == 1);
  CHECK(r.issues().front().kind == ParseIssueKind::Syntax);
}

TEST_CASE("parse_model reports every failing line, not a partial model") {
  ParseResult r = parse_model("model \"x\"\nentity s a, b\nvar v: bool = false\nfrobnicate\ngoal v == \n");
  REQUIRE_FALSE(r.ok());
  std::vector<int> lines;
  for (const auto& i : r.issues()) lines.push_back(i.line);
  CHECK(lines == std::vector<int>{2, 4, 5});
  CHECK(r.issues()[1].kind == ParseIssueKind::UnknownKeyword);
  CHECK(r.issues()[2].kind == ParseIssueKind::MalformedTerm);
}

TEST_CASE("parse_model: pre and eff outside an action are syntax errors") {
  ParseResult r = parse_model("model \"x\"\nvar v: bool = false\npre v == true\n");
  REQUIRE_FALSE(r.ok());
  CHECK(r.issues().front().line == 3);
}

TEST_CASE("parse_model: comments and blank lines are ignored, indentation insignificant") {
  auto m = parse_ok(
      "# header\nmodel \"c\"   # trailing\n\n   entity s: a\nvar v(s): int[-2..2] = -1\n"
      "action go(x: s)\npre v(x) < 2\n        eff v(x) := v(x) + 1\ngoal v(a) == 2\n");
  CHECK(m.variables[0].domain == Domain{IntDomain{-2, 2}});
  CHECK(m.variables[0].initial == Value{std::int64_t{-1}});
  CHECK(std::holds_alternative<DeltaUpdate>(m.actions[0].effects[0].update));
}

TEST_CASE("parse_plan examples") {
  Plan p = parse_plan("step 1: move(alice, ward, pharmacy)");
  REQUIRE(p.steps.size() == 1);
  REQUIRE(p.steps[0].parsed.has_value());
  CHECK(p.steps[0].parsed->action == "move");
  CHECK(p.steps[0].parsed->args == std::vector<std::string>{"alice", "ward", "pharmacy"});

  Plan prose = parse_plan("First, Alice should walk over.");
  REQUIRE(prose.steps.size() == 1);
  CHECK_FALSE(prose.steps[0].parsed.has_value());

  CHECK(parse_plan("").steps.empty());
}

TEST_CASE("parse_plan: zero-argument steps and numbering") {
  Plan p = parse_plan("step 1: cure()\n\nstep 2: paint( )\nstep 3 paint()\n");
  REQUIRE(p.steps.size() == 3);
  CHECK(p.steps[0].parsed == ParsedStep{"cure", {}});
  CHECK(p.steps[1].parsed == ParsedStep{"paint", {}});
  CHECK_FALSE(p.steps[2].parsed.has_value());
  for (std::size_t i = 0; i < p.steps.size(); ++i) CHECK(p.steps[i].index == static_cast<int>(i) + 1);
}

TEST_CASE("parse_plan is total and counts nonempty lines") {
  std::mt19937 rng(11);
  const std::string alphabet = "step 1:(),ab_\n\t\r #`xyz9";
  for (int iter = 0; iter < 3000; ++iter) {
    std::string text;
    for (int i = 0, n = static_cast<int>(rng() % 80); i < n; ++i) text += alphabet[rng() % alphabet.size()];
    Plan p;
    CHECK_NOTHROW(p = parse_plan(text));
    std::size_t nonempty = 0, start = 0;
    while (start <= text.size()) {
      auto nl = text.find('\n', start);
      std::string line = text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
      if (line.find_first_not_of(" \t\r") != std::string::npos) ++nonempty;
      if (nl == std::string::npos) break;
      start = nl + 1;
    }
    CHECK(p.steps.size() == nonempty);
  }
}

TEST_CASE("extract_blocks examples") {
  auto both = extract_blocks("intro\n```mdl\nmodel \"a\"\n```\nmiddle\n```plan\nstep 1: x()\n```\nend\n");
  REQUIRE(both.model_text.has_value());
  REQUIRE(both.plan_text.has_value());
  CHECK(*both.model_text == "model \"a\"\n");
  CHECK(*both.plan_text == "step 1: x()\n");

  std::string prose = "Nothing structured here.\nJust words.\n";
  auto none = extract_blocks(prose);
  CHECK_FALSE(none.model_text.has_value());
  CHECK_FALSE(none.plan_text.has_value());
  CHECK(none.residue == prose);

  auto two = extract_blocks("```plan\nstep 1: a()\n```\n```plan\nstep 1: b()\n```\n");
  REQUIRE(two.plan_text.has_value());
  CHECK(*two.plan_text == "step 1: b()\n");
  CHECK(two.residue.find("a()") != std::string::npos);
}

TEST_CASE("extract_blocks: untagged fences are residue, unclosed fence runs to the end") {
  auto e = extract_blocks("```\nnot a plan\n```\n```plan\nstep 1: go()\n");
  REQUIRE(e.plan_text.has_value());
  CHECK(*e.plan_text == "step 1: go()\n");
  CHECK(e.residue.find("not a plan") != std::string::npos);
}

TEST_CASE("extract_blocks accounts for every character outside fence delimiters") {
  std::mt19937 rng(5);
  const char* pieces[] = {"```mdl\n", "```plan\n", "```\n", "```python\n", "hello ", "step 1: a()\n", "x\n", "\n"};
  for (int iter = 0; iter < 2000; ++iter) {
    std::string text;
    for (int i = 0, n = static_cast<int>(rng() % 12); i < n; ++i) text += pieces[rng() % 8];
    auto e = extract_blocks(text);
    auto count = [](const std::string& s) {
      std::size_t n = 0;
      for (char c : s)
        if (c != '`' && c != '\n') ++n;
      return n;
    };
    // Only delimiter lines may disappear; everything else must reappear.
    std::size_t all = count(text), floor = 0, pos = 0;
    while (pos < text.size()) {
      auto nl = std::min(text.find('\n', pos), text.size());
      std::string line = text.substr(pos, nl - pos);
      if (line != "```mdl" && line != "```plan") floor += count(line);
      pos = nl + 1;
    }
    std::size_t out = count(e.residue) + (e.model_text ? count(*e.model_text) : 0) + (e.plan_text ? count(*e.plan_text) : 0);
    CHECK(out >= floor);
    CHECK(out <= all);
  }
}

TEST_CASE("serialize_model: empty sections are omitted") {
  auto m = parse_ok("model \"t\"\nvar done: bool = false\ngoal done == true\n");
  std::string text = serialize_model(m);
  CHECK(text.find("constraint") == std::string::npos);
  CHECK(text.find("action") == std::string::npos);
}

TEST_CASE("serialize_model is canonical and round-trips") {
  auto a = parse_ok(testutil::kDemoModel);
  auto b = parse_ok(std::string("# x\n") + testutil::kDemoModel);
  CHECK(serialize_model(a) == serialize_model(b));
  CHECK(parse_ok(serialize_model(a)) == a);
  for (const auto& id : list_tasks(testutil::corpus_root())) {
    Task t = load_task(id, testutil::corpus_root());
    auto again = parse_ok(serialize_model(t.reference_model));
    CHECK(again == t.reference_model);
    CHECK(serialize_model(again) == serialize_model(t.reference_model));
  }
}

TEST_CASE("random models round-trip through serialize and parse") {
  testutil::RandomModels gen(1234);
  for (int i = 0; i < 500; ++i) {
    ProblemModel m = gen.next();
    std::string text = serialize_model(m);
    ParseResult r = parse_model(text);
    INFO(text);
    REQUIRE(r.ok());
    CHECK(r.model() == m);
  }
}

TEST_CASE("format_plan and make_plan") {
  Plan p = make_plan({{"move", {"alice", "ward", "pharmacy"}}, {"cure", {}}});
  CHECK(format_plan(p) == "step 1: move(alice, ward, pharmacy)\nstep 2: cure()\n");
  CHECK(parse_plan(format_plan(p)) == p);
}

TEST_CASE("is_identifier") {
  CHECK(is_identifier("a_b9"));
  CHECK_FALSE(is_identifier("9a"));
  CHECK_FALSE(is_identifier("_a"));
  CHECK_FALSE(is_identifier(""));
  CHECK_FALSE(is_identifier("a-b"));
}
