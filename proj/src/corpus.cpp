#include "mfr/corpus.hpp"

#include <algorithm>
#include <cassert>
#include <fstream>
#include <sstream>

#include "mfr/checker.hpp"

#ifndef MFRKIT_CORPUS_DIR
#define MFRKIT_CORPUS_DIR "corpus"
#endif

namespace mfr {

namespace fs = std::filesystem;

namespace {

constexpr std::pair<TaskFamily, const char*> kFamilies[] = {
    {TaskFamily::MedicationScheduling, "medication-scheduling"},
    {TaskFamily::TemporalRouting, "temporal-routing"},
    {TaskFamily::ResourceAllocation, "resource-allocation"},
    {TaskFamily::LogicPuzzle, "logic-puzzle"},
    {TaskFamily::ProceduralSynthesis, "procedural-synthesis"},
};

struct IndexEntry {
  std::string id;
  TaskFamily family;
};

std::vector<IndexEntry> read_index(const fs::path& root) {
  std::istringstream in(read_file(root / "tasks.txt"));
  std::vector<IndexEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string id, family;
    if (!(fields >> id)) continue;
    if (!(fields >> family)) throw CorpusError("tasks.txt: missing family for " + id);
    auto f = task_family_from_string(family);
    if (!f) throw CorpusError("tasks.txt: unknown family " + family);
    out.push_back({id, *f});
  }
  return out;
}

}  // namespace

const char* to_string(TaskFamily f) {
  for (const auto& [v, name] : kFamilies)
    if (v == f) return name;
  return "?";
}

std::optional<TaskFamily> task_family_from_string(std::string_view s) {
  for (const auto& [v, name] : kFamilies)
    if (s == name) return v;
  return std::nullopt;
}

fs::path default_corpus_root() { return fs::path(MFRKIT_CORPUS_DIR); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> list_tasks(const fs::path& root) {
  std::vector<std::string> ids;
  for (const auto& e : read_index(root)) ids.push_back(e.id);
  return ids;
}

Task load_task(const std::string& id, const fs::path& root) {
  auto index = read_index(root);
  auto it = std::find_if(index.begin(), index.end(), [&](const IndexEntry& e) { return e.id == id; });
  if (it == index.end()) throw UnknownTask(id);

  Task task;
  task.id = id;
  task.family = it->family;
  fs::path dir = root / "tasks" / id;
  task.nl_description = read_file(dir / "task.txt");
  task.model_text = read_file(dir / "model.mdl");
  ParseResult parsed = parse_model(task.model_text);
  if (!parsed) {
    const auto& issue = parsed.issues().front();
    throw CorpusError(id + "/model.mdl:" + std::to_string(issue.line) + ": " + issue.message);
  }
  task.reference_model = std::move(parsed.model());
  task.reference_plan = parse_plan(read_file(dir / "reference.plan"));

  if (fs::is_directory(dir / "mutants")) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir / "mutants"))
      if (entry.path().extension() == ".plan") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      // NN.CLASS.plan
      std::string stem = f.stem().string();
      auto dot = stem.find('.');
      auto cls = dot == std::string::npos ? std::nullopt : violation_class_from_string(stem.substr(dot + 1));
      if (!cls) throw CorpusError(id + ": mutant file name must be NN.<ViolationClass>.plan: " + f.filename().string());
      task.mutants.push_back({f.filename().string(), parse_plan(read_file(f)), *cls});
    }
  }

#ifndef NDEBUG
  assert(validate_plan(task.reference_model, task.reference_plan, ValidationMode::HaltOnFirst).goal_satisfied);
#endif
  return task;
}

std::vector<std::string> corpus_invariant_failures(const Task& task) {
  std::vector<std::string> out;
  auto issues = check_model(task.reference_model);
  for (const auto& i : issues) out.push_back("model issue: " + format_issue(i));
  if (!issues.empty()) return out;

  auto size = state_space_size(task.reference_model);
  if (size.saturated || size.value > 100'000) out.push_back("state space " + std::to_string(size.value) + " > 10^5");

  auto ref = validate_plan(task.reference_model, task.reference_plan, ValidationMode::ContinueAndSkip);
  if (!ref.violations.empty() || !ref.goal_satisfied)
    out.push_back("reference plan has " + std::to_string(ref.violations.size()) + " violation(s)");

  for (const auto& m : task.mutants) {
    auto report = validate_plan(task.reference_model, m.plan, ValidationMode::ContinueAndSkip);
    if (report.violations.empty()) {
      out.push_back(m.name + ": no violation");
    } else if (report.violations.front().cls != m.expected) {
      out.push_back(m.name + ": first violation is " + to_string(report.violations.front().cls));
    }
  }
  return out;
}

}  // namespace mfr
