// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. argv[1] is the mfrkit CLI used for the end-to-end runs.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <sys/wait.h>
#include <unistd.h>

#include "mfr/corpus.hpp"
#include "mfr/harness.hpp"
#include "mfr/mdl.hpp"
#include "mfr/oracle.hpp"
#include "mfr/pipeline.hpp"
#include "mfr/validator.hpp"
#include "testutil.hpp"

using namespace mfr;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int n, const std::string& name, const Outcome& o, double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2fs", seconds);
  std::cout << (o.pass ? "PASS" : "FAIL") << " " << n << " " << name << " (" << buf << ")";
  if (!o.detail.empty()) std::cout << ": " << o.detail;
  std::cout << "\n" << std::flush;
  if (!o.pass) ++failures;
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<Task> all_tasks() {
  std::vector<Task> out;
  for (const auto& id : list_tasks(testutil::corpus_root())) out.push_back(load_task(id, testutil::corpus_root()));
  return out;
}

bool validator_accepts(const ProblemModel& m, const Plan& p) {
  auto r = validate_plan(m, p, ValidationMode::HaltOnFirst);
  return r.violations.empty() && r.goal_satisfied;
}

std::string state_key(const State& s) {
  std::string k;
  for (std::size_t i = 0; i < s.size(); ++i) k += to_string(s.at(i)) + '|';
  return k;
}

// 1 ------------------------------------------------------------------------

Outcome mapping_fidelity() {
  struct Row {
    const char* strategy;
    const char* cells[3];
    int expected[3];
  };
  const Row rows[] = {{"CoT", {"Medium", "Frequent", "Low"}, {2, 3, 1}},
                      {"ReAct", {"Medium\xE2\x80\x93Low", "Occasional", "Medium"}, {2, 2, 2}},
                      {"Model-First", {"Low", "Rare", "High"}, {1, 1, 4}}};
  Outcome o;
  for (const auto& r : rows)
    for (int c = 0; c < 3; ++c) {
      auto rating = parse_rating(r.cells[c]);
      int got = rating ? qualitative_to_numeric(*rating) : -1;
      if (got != r.expected[c]) {
        o.pass = false;
        o.detail += std::string(r.strategy) + " cell " + std::to_string(c) + " -> " + std::to_string(got) + "; ";
      }
    }
  return o;
}

// 2 ------------------------------------------------------------------------

struct DiffStats {
  std::uint64_t compared = 0;
  std::uint64_t accepted = 0;
  std::uint64_t disagreements = 0;
  std::uint64_t covered = 0;  // sequences decided by a rejected prefix
  std::string first_disagreement;
};

DiffStats differential(const Task& t, std::uint32_t seed) {
  DiffStats st;
  const ProblemModel& m = t.reference_model;
  auto ground = ground_actions(m);
  auto check = [&](const std::vector<ParsedStep>& steps) {
    Plan p = make_plan(steps);
    bool a = validator_accepts(m, p);
    bool b = execute_reference(m, p).accepted;
    ++st.compared;
    st.accepted += a;
    if (a != b) {
      if (!st.disagreements) st.first_disagreement = t.id + ": " + format_plan(p);
      ++st.disagreements;
    }
  };

  // Every sequence up to depth 6. A prefix both sides reject for a step-level
  // reason is rejected by every extension too, so its subtree is counted as
  // covered rather than walked; a sample of those extensions is still checked.
  std::mt19937 spot(seed ^ 0x5eedu);
  auto subtree = [&](int below) {
    std::uint64_t n = 0, layer = 1;
    for (int k = 1; k <= below; ++k) n += (layer *= ground.size());
    return n;
  };
  std::vector<ParsedStep> seq;
  std::function<void()> rec = [&] {
    Plan p = make_plan(seq);
    auto v = validate_plan(m, p, ValidationMode::HaltOnFirst);
    bool a = v.violations.empty() && v.goal_satisfied;
    auto ref = execute_reference(m, p);
    ++st.compared;
    st.accepted += a;
    if (a != ref.accepted) {
      if (!st.disagreements) st.first_disagreement = t.id + ": " + format_plan(p);
      ++st.disagreements;
    }
    int remaining = 6 - static_cast<int>(seq.size());
    if (remaining == 0) return;
    bool step_rejected = !v.violations.empty() && v.violations.front().cls != ViolationClass::GoalUnmet &&
                         !ref.accepted && ref.reason != "goal not reached";
    if (step_rejected) {
      st.covered += subtree(remaining);
      if (spot() % 16 == 0) {
        std::vector<ParsedStep> ext = seq;
        for (int k = 0; k < remaining; ++k) ext.push_back(ground[spot() % ground.size()]);
        check(ext);
      }
      return;
    }
    for (const auto& g : ground) {
      seq.push_back(g);
      rec();
      seq.pop_back();
    }
  };
  rec();

  // Valid prefixes of the reference length, which reach deeper than the
  // exhaustive layer and include the accepted plans.
  for (int d = 7; d <= std::min(8, static_cast<int>(t.reference_plan.steps.size())); ++d) {
    SearchLimits lim;
    lim.max_plans = 20'000;
    try {
      for (const auto& p : enumerate_valid_plans(m, d, lim)) {
        std::vector<ParsedStep> steps;
        for (const auto& s : p.steps) steps.push_back(*s.parsed);
        check(steps);
      }
    } catch (const CeilingExceeded&) {
    }
  }

  // 10,000 random plans up to depth 8: half uniform, half edits of the
  // reference plan, with occasional unknown names mixed in.
  std::mt19937 rng(seed);
  std::vector<ParsedStep> ref;
  for (const auto& s : t.reference_plan.steps) ref.push_back(*s.parsed);
  for (int i = 0; i < 10'000; ++i) {
    std::vector<ParsedStep> steps;
    if (i % 2 == 0) {
      int len = static_cast<int>(rng() % 9);
      for (int k = 0; k < len; ++k) steps.push_back(ground[rng() % ground.size()]);
    } else {
      steps = ref;
      int edits = static_cast<int>(rng() % 3);
      for (int e = 0; e < edits && !steps.empty(); ++e) {
        std::size_t at = rng() % steps.size();
        switch (rng() % 3) {
          case 0: steps[at] = ground[rng() % ground.size()]; break;
          case 1: steps.erase(steps.begin() + at); break;
          default: steps.insert(steps.begin() + at, ground[rng() % ground.size()]);
        }
      }
      if (steps.size() > 8) steps.resize(8);
    }
    if (!steps.empty() && rng() % 25 == 0) {
      auto& s = steps[rng() % steps.size()];
      if (!s.args.empty() && rng() % 2) s.args[0] = "nobody";
      else s.action = "wander";
    }
    check(steps);
  }
  return st;
}

Outcome differential_all(const std::vector<Task>& tasks) {
  std::vector<std::future<DiffStats>> jobs;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    jobs.push_back(std::async(std::launch::async, differential, std::cref(tasks[i]), 1000u + static_cast<std::uint32_t>(i)));
  Outcome o;
  std::uint64_t compared = 0, accepted = 0, bad = 0, covered = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    DiffStats st = jobs[i].get();
    compared += st.compared;
    accepted += st.accepted;
    bad += st.disagreements;
    covered += st.covered;
    if (st.disagreements) o.detail += st.first_disagreement;
  }
  o.pass = bad == 0;
  o.detail = std::to_string(compared) + " plans, " + std::to_string(accepted) + " accepted, " + std::to_string(bad) +
             " disagreements; " + std::to_string(covered) +
             " more sequences up to depth 6 decided by a rejected prefix" + (bad ? "; " + o.detail : "");
  return o;
}

// 3 ------------------------------------------------------------------------

// Shortest goal distance by breadth-first search through the validator's own
// step semantics.
std::optional<int> validator_bfs(const ProblemModel& m, int max_depth) {
  State s0 = initial_state(m);
  if (!check_constraints(s0, m, 0).empty()) return std::nullopt;
  if (evaluate_condition(m.goal, s0)) return 0;
  auto ground = ground_actions(m);
  std::unordered_set<std::string> seen{state_key(s0)};
  std::deque<std::pair<State, int>> q{{s0, 0}};
  while (!q.empty()) {
    auto [s, d] = q.front();
    q.pop_front();
    if (d == max_depth) continue;
    for (const auto& g : ground) {
      PlanStep step;
      step.parsed = g;
      auto r = execute_step(s, step, m);
      if (!std::holds_alternative<State>(r)) continue;
      State& n = std::get<State>(r);
      if (!seen.insert(state_key(n)).second) continue;
      if (evaluate_condition(m.goal, n)) return d + 1;
      q.emplace_back(std::move(n), d + 1);
    }
  }
  return std::nullopt;
}

Outcome optimality(const std::vector<Task>& tasks) {
  Outcome o;
  for (const auto& t : tasks) {
    auto r = solve(t.reference_model, 12);
    auto bfs = validator_bfs(t.reference_model, 12);
    bool ok = r.plan && bfs && static_cast<int>(r.plan->steps.size()) == *bfs &&
              validator_accepts(t.reference_model, *r.plan);
    if (!ok) {
      o.pass = false;
      o.detail += t.id + " ";
    }
  }
  o.detail = o.pass ? std::to_string(tasks.size()) + " tasks, plan lengths match an independent search"
                    : "mismatch on " + o.detail;
  return o;
}

// 4 ------------------------------------------------------------------------

Outcome round_trip(const std::vector<Task>& tasks) {
  Outcome o;
  int n = 0, bad = 0;
  auto one = [&](const ProblemModel& m, const std::string& label) {
    ++n;
    std::string text = serialize_model(m);
    auto r = parse_model(text);
    if (!r || !(r.model() == m) || serialize_model(r.model()) != text) {
      if (!bad) o.detail = "first failure: " + label;
      ++bad;
    }
  };
  for (const auto& t : tasks) one(t.reference_model, t.id);
  testutil::RandomModels gen(77);
  for (int i = 0; i < 1000; ++i) one(gen.next(), "random #" + std::to_string(i));
  o.pass = bad == 0;
  o.detail = std::to_string(n) + " models, " + std::to_string(bad) + " failures" + (bad ? "; " + o.detail : "");
  return o;
}

// 5 ------------------------------------------------------------------------

Outcome mutants(const std::vector<Task>& tasks) {
  Outcome o;
  int fixtures = 0, wrong = 0;
  std::string worst;
  double worst_rate = 2.0;
  std::mt19937 rng(2024);
  for (const auto& t : tasks) {
    for (const auto& mu : t.mutants) {
      ++fixtures;
      auto r = validate_plan(t.reference_model, mu.plan, ValidationMode::ContinueAndSkip);
      if (r.violations.empty() || r.violations.front().cls != mu.expected) {
        ++wrong;
        o.detail += t.id + "/" + mu.name + " ";
      }
    }
    std::vector<ParsedStep> ref;
    for (const auto& s : t.reference_plan.steps) ref.push_back(*s.parsed);
    int violated = 0, made = 0;
    while (made < 1000) {
      std::vector<ParsedStep> steps = ref;
      std::size_t i = rng() % steps.size();
      switch (made % 3) {
        case 0: {
          if (steps.size() < 2) continue;
          i = rng() % (steps.size() - 1);
          if (steps[i] == steps[i + 1]) continue;  // a no-op swap is not a mutation
          std::swap(steps[i], steps[i + 1]);
          break;
        }
        case 1: steps.erase(steps.begin() + i); break;
        default: steps[i].action += "_x"; break;
      }
      ++made;
      if (!validate_plan(t.reference_model, make_plan(steps), ValidationMode::ContinueAndSkip).violations.empty())
        ++violated;
    }
    double rate = violated / 1000.0;
    if (rate < worst_rate || worst.empty()) {
      worst_rate = rate;
      worst = t.id;
    }
  }
  o.pass = wrong == 0 && worst_rate >= 0.95;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", worst_rate);
  o.detail = std::to_string(fixtures) + " fixtures, " + std::to_string(wrong) + " misclassified" +
             (wrong ? " (" + o.detail + ")" : "") + "; lowest mutation kill rate " + buf + " (" + worst + ")";
  return o;
}

// 6, 7 ---------------------------------------------------------------------

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

int run_cli(const std::string& cli, const std::string& args) {
  std::string cmd = quote(cli) + " --corpus " + quote(testutil::corpus_root()) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// run for every task and strategy, then eval; returns report bytes or an error.
std::optional<std::pair<std::string, std::string>> pipeline(const std::string& cli, const fs::path& fixture,
                                                            const fs::path& work, const std::vector<Task>& tasks,
                                                            std::string& err) {
  fs::remove_all(work);
  fs::create_directories(work / "transcripts");
  for (const auto& t : tasks)
    for (const char* s : {"cot", "react", "mfr-two-call"}) {
      int rc = run_cli(cli, "run --task " + t.id + " --strategy " + s + " --backend replay --fixture " + quote(fixture) +
                                " --out " + quote(work / "transcripts"));
      if (rc != 0) {
        err = "run " + t.id + " " + s + " exited " + std::to_string(rc);
        return std::nullopt;
      }
    }
  int rc = run_cli(cli, "eval --transcripts " + quote(work / "transcripts") + " --out " + quote(work / "report"));
  if (rc != 0) {
    err = "eval exited " + std::to_string(rc);
    return std::nullopt;
  }
  return std::pair{read_file(work / "report" / "report.json"), read_file(work / "report" / "plot.csv")};
}

fs::path shipped_fixture() { return testutil::corpus_root() / "fixtures" / "replay.jsonl"; }

Outcome replay_determinism(const std::string& cli, const std::vector<Task>& tasks, const fs::path& tmp) {
  Outcome o;
  std::string err;
  auto a = pipeline(cli, shipped_fixture(), tmp / "a", tasks, err);
  auto b = a ? pipeline(cli, shipped_fixture(), tmp / "b", tasks, err) : std::nullopt;
  if (!a || !b) return {false, err};
  o.pass = a->first == b->first && a->second == b->second;
  o.detail = std::to_string(tasks.size() * 3) + " runs twice; report.json " + std::to_string(a->first.size()) +
             " bytes, " + (o.pass ? "identical" : "differs");
  return o;
}

std::string strip_plan_blocks(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  std::string line;
  bool inside = false;
  while (std::getline(in, line)) {
    std::string t = line;
    while (!t.empty() && (t.back() == '\r' || t.back() == ' ')) t.pop_back();
    if (!inside && t.rfind("```plan", 0) == 0) {
      inside = true;
      continue;
    }
    if (inside) {
      if (t == "```") inside = false;
      continue;
    }
    out += line + "\n";
  }
  return out;
}

Outcome phase_separation(const std::string& cli, const std::vector<Task>& tasks, const fs::path& tmp) {
  std::unordered_set<std::string> phase1;
  for (const auto& t : tasks) phase1.insert(prompt_key(render_prompt(Strategy::MfrTwoCall, Phase::One, t.nl_description)));
  std::ifstream in(shipped_fixture());
  std::ofstream out(tmp / "stripped.jsonl");
  std::string line;
  int stripped = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto rec = nlohmann::ordered_json::parse(line);
    if (phase1.count(rec["key"].get<std::string>())) {
      std::string before = rec["response"].get<std::string>();
      std::string after = strip_plan_blocks(before);
      if (after != before) ++stripped;
      rec["response"] = after;
    }
    out << rec.dump() << "\n";
  }
  out.close();
  std::string err;
  auto a = pipeline(cli, shipped_fixture(), tmp / "orig", tasks, err);
  auto b = a ? pipeline(cli, tmp / "stripped.jsonl", tmp / "stripped", tasks, err) : std::nullopt;
  if (!a || !b) return {false, err};
  Outcome o;
  o.pass = stripped > 0 && a->first == b->first && a->second == b->second;
  o.detail = std::to_string(stripped) + " phase-1 responses carried a plan block; report " +
             (a->first == b->first ? "identical" : "differs");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance PATH_TO_MFRKIT\n";
    return 2;
  }
  const std::string cli = argv[1];
  auto tasks = all_tasks();
  fs::path tmp = fs::temp_directory_path() / ("mfrkit_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(tmp);

  auto t0 = Clock::now();
  report(1, "mapping fidelity", mapping_fidelity(), since(t0));

  t0 = Clock::now();
  Outcome diff = differential_all(tasks);
  double secs = since(t0);
  if (secs >= 60) diff = {false, diff.detail + " (over 60s)"};
  report(2, "oracle/validator differential", diff, secs);

  t0 = Clock::now();
  Outcome opt = optimality(tasks);
  secs = since(t0);
  if (secs >= 30) opt = {false, opt.detail + " (over 30s)"};
  report(3, "oracle optimality", opt, secs);

  t0 = Clock::now();
  Outcome rt = round_trip(tasks);
  secs = since(t0);
  if (secs >= 10) rt = {false, rt.detail + " (over 10s)"};
  report(4, "parser round-trip", rt, secs);

  t0 = Clock::now();
  Outcome mu = mutants(tasks);
  secs = since(t0);
  if (secs >= 60) mu = {false, mu.detail + " (over 60s)"};
  report(5, "mutant detection", mu, secs);

  t0 = Clock::now();
  Outcome rd = replay_determinism(cli, tasks, tmp);
  report(6, "replay determinism", rd, since(t0));

  t0 = Clock::now();
  Outcome ps = phase_separation(cli, tasks, tmp);
  report(7, "phase separation", ps, since(t0));

  fs::remove_all(tmp);
  return failures == 0 ? 0 : 1;
}
