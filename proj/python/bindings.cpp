#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mfr/checker.hpp"
#include "mfr/corpus.hpp"
#include "mfr/harness.hpp"
#include "mfr/mdl.hpp"
#include "mfr/oracle.hpp"
#include "mfr/pipeline.hpp"
#include "mfr/validator.hpp"

namespace py = pybind11;
using namespace mfr;

namespace {

// Python-facing functions take and return text and plain containers; the
// model is re-parsed on each call.

py::object model_error;

ProblemModel parse_or_raise(const std::string& text) {
  auto r = parse_model(text);
  if (!r) {
    std::string msg;
    for (const auto& i : r.issues())
      msg += std::to_string(i.line) + ":" + std::to_string(i.column) + ": " + to_string(i.kind) + ": " + i.message + "\n";
    PyErr_SetString(model_error.ptr(), msg.c_str());
    throw py::error_already_set();
  }
  return r.model();
}

Strategy strategy_or_raise(const std::string& s) {
  auto st = strategy_from_string(s);
  if (!st) throw py::value_error("unknown strategy '" + s + "'");
  return *st;
}

std::filesystem::path root_or_default(const std::optional<std::string>& root) {
  return root ? std::filesystem::path(*root) : default_corpus_root();
}

py::dict violation_dict(const Violation& v) {
  py::dict d;
  d["step"] = v.step_index;
  d["class"] = to_string(v.cls);
  d["detail"] = v.detail;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  model_error = py::exception<std::runtime_error>(m, "ModelError", PyExc_ValueError);
  py::register_exception<UnknownTask>(m, "UnknownTask", PyExc_KeyError);

  m.def("parse_model", [](const std::string& text) { return serialize_model(parse_or_raise(text)); }, py::arg("text"),
        "Parse MDL text and return its canonical serialization; raises ModelError on syntax issues.");

  m.def(
      "check",
      [](const std::string& text) {
        std::vector<std::string> out;
        for (const auto& i : check_model(parse_or_raise(text))) out.push_back(format_issue(i));
        return out;
      },
      py::arg("text"), "Semantic issues of a model, one formatted line each.");

  m.def(
      "validate",
      [](const std::string& model_text, const std::string& plan_text, const std::string& mode) {
        if (mode != "halt" && mode != "continue") throw py::value_error("mode must be 'halt' or 'continue'");
        ProblemModel model = parse_or_raise(model_text);
        Plan plan = parse_plan(plan_text);
        auto r = validate_plan(model, plan, mode == "halt" ? ValidationMode::HaltOnFirst : ValidationMode::ContinueAndSkip);
        py::list violations;
        for (const auto& v : r.violations) violations.append(violation_dict(v));
        py::dict d;
        d["violations"] = violations;
        d["goal_satisfied"] = r.goal_satisfied;
        d["halted_at"] = r.halted_at ? py::cast(*r.halted_at) : py::none();
        d["trace"] = trace_render(r, model, plan);
        return d;
      },
      py::arg("model"), py::arg("plan"), py::arg("mode") = "continue");

  m.def(
      "solve",
      [](const std::string& model_text, int max_depth) -> std::optional<std::string> {
        ProblemModel model = parse_or_raise(model_text);
        SolveResult r;
        {
          py::gil_scoped_release release;
          r = solve(model, max_depth);
        }
        if (!r.plan) return std::nullopt;
        return format_plan(*r.plan);
      },
      py::arg("model"), py::arg("max_depth") = 12, "Shortest plan text, or None when none exists within max_depth.");

  m.def(
      "extract_blocks",
      [](const std::string& text) {
        auto e = extract_blocks(text);
        py::dict d;
        d["model"] = e.model_text ? py::cast(*e.model_text) : py::none();
        d["plan"] = e.plan_text ? py::cast(*e.plan_text) : py::none();
        d["residue"] = e.residue;
        return d;
      },
      py::arg("text"));

  m.def(
      "render_prompt",
      [](const std::string& strategy, const std::string& phase, const std::string& task_text,
         std::optional<std::string> model_text) {
        Phase p;
        if (phase == "one") p = Phase::One;
        else if (phase == "two") p = Phase::Two;
        else if (phase == "only") p = Phase::Only;
        else throw py::value_error("phase must be 'one', 'two' or 'only'");
        return render_prompt(strategy_or_raise(strategy), p, task_text, model_text);
      },
      py::arg("strategy"), py::arg("phase"), py::arg("task_text"), py::arg("model_text") = py::none());

  m.def("prompt_key", [](const std::string& prompt) { return prompt_key(prompt); }, py::arg("prompt"));

  m.def(
      "list_tasks", [](std::optional<std::string> root) { return list_tasks(root_or_default(root)); },
      py::arg("corpus") = py::none());

  m.def(
      "load_task",
      [](const std::string& id, std::optional<std::string> root) {
        Task t = load_task(id, root_or_default(root));
        py::dict d;
        d["id"] = t.id;
        d["family"] = to_string(t.family);
        d["description"] = t.nl_description;
        d["model"] = t.model_text;
        d["reference_plan"] = format_plan(t.reference_plan);
        py::list mutants;
        for (const auto& mu : t.mutants) mutants.append(py::make_tuple(mu.name, to_string(mu.expected)));
        d["mutants"] = mutants;
        return d;
      },
      py::arg("task_id"), py::arg("corpus") = py::none());

  m.def(
      "run_replay",
      [](const std::string& task_id, const std::string& strategy, const std::string& fixture,
         std::optional<std::string> root) {
        Task t = load_task(task_id, root_or_default(root));
        ReplayBackend backend(fixture);
        auto tr = run_strategy({t.id, t.nl_description, &t.reference_model}, strategy_or_raise(strategy), backend);
        return transcript_to_json(tr, false);
      },
      py::arg("task_id"), py::arg("strategy"), py::arg("fixture"), py::arg("corpus") = py::none(),
      "Run one strategy against a replay fixture and return the transcript JSON.");

  m.def(
      "score",
      [](const std::string& transcript_json, std::optional<std::string> root) {
        TranscriptRecord tr = transcript_from_json(transcript_json);
        Task t = load_task(tr.task_id, root_or_default(root));
        TaskScore s = score_transcript(t, tr);
        py::dict d;
        d["task_id"] = s.task_id;
        d["strategy"] = to_string(s.strategy);
        d["modeling_ok"] = s.modeling_ok;
        d["constraint_violations"] = s.constraint_violations;
        d["implicit_assumptions"] = s.implicit_assumptions;
        d["precondition_failures"] = s.precondition_failures;
        d["goal_success"] = s.goal_success;
        d["clarity"] = s.clarity;
        d["plan_length"] = s.plan_length;
        return d;
      },
      py::arg("transcript"), py::arg("corpus") = py::none());

  m.def(
      "qualitative_to_numeric",
      [](const std::string& label) {
        auto r = parse_rating(label);
        if (!r) throw py::value_error("unknown rating '" + label + "'");
        return qualitative_to_numeric(*r);
      },
      py::arg("label"));
}
