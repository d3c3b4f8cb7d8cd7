#pragma once

// Desk-scale task corpus. Layout under the corpus root:
//
//   tasks.txt                      one `ID FAMILY` line per task, in order
//   tasks/ID/task.txt              natural-language description
//   tasks/ID/model.mdl             reference model
//   tasks/ID/reference.plan        shortest plan found by the oracle
//   tasks/ID/mutants/NN.CLASS.plan plans expected to fail with CLASS first

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfr/mdl.hpp"
#include "mfr/model.hpp"
#include "mfr/validator.hpp"

namespace mfr {

enum class TaskFamily { MedicationScheduling, TemporalRouting, ResourceAllocation, LogicPuzzle, ProceduralSynthesis };

const char* to_string(TaskFamily f);
std::optional<TaskFamily> task_family_from_string(std::string_view s);

struct Mutant {
  std::string name;  // file name
  Plan plan;
  ViolationClass expected;
};

struct Task {
  std::string id;
  TaskFamily family = TaskFamily::MedicationScheduling;
  std::string nl_description;
  std::string model_text;
  ProblemModel reference_model;
  Plan reference_plan;
  std::vector<Mutant> mutants;
};

class UnknownTask : public std::runtime_error {
 public:
  explicit UnknownTask(const std::string& id) : std::runtime_error("unknown task id '" + id + "'") {}
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Corpus root compiled into the build (overridable by callers).
std::filesystem::path default_corpus_root();

std::vector<std::string> list_tasks(const std::filesystem::path& root = default_corpus_root());

/// Loads and materializes a task. Throws UnknownTask or CorpusError (when a
/// file is missing or the reference model does not parse).
Task load_task(const std::string& id, const std::filesystem::path& root = default_corpus_root());

/// Reasons the task breaks a corpus invariant: clean model, clean reference
/// plan reaching the goal, every mutant failing first with its class, and a
/// state space of at most 10^5.
std::vector<std::string> corpus_invariant_failures(const Task& task);

std::string read_file(const std::filesystem::path& path);

}  // namespace mfr
