#include <json.hpp>

#include "mfr/checker.hpp"
#include "mfr/pipeline.hpp"
#include "mfr/validator.hpp"

namespace mfr {

using ojson = nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

/// Why an extracted model cannot anchor phase 2, if it cannot.
std::optional<std::string> modeling_problem(const std::optional<std::string>& model_text) {
  if (!model_text) return "no mdl block in response";
  ParseResult parsed = parse_model(*model_text);
  if (!parsed) {
    const ParseIssue& i = parsed.issues().front();
    return "parse error at " + std::to_string(i.line) + ":" + std::to_string(i.column) + ": " + i.message;
  }
  auto issues = check_model(parsed.model());
  if (!issues.empty()) return "semantic issue: " + format_issue(issues.front());
  return std::nullopt;
}

bool is_finish(std::string_view action) {
  action = trim(action);
  return action == "finish" || action == "finish()";
}

template <class T>
ojson opt(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

template <class T>
std::optional<T> get_opt(const ojson& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

}  // namespace

std::optional<std::string> last_action_line(std::string_view response) {
  std::optional<std::string> found;
  std::size_t start = 0;
  while (start <= response.size()) {
    std::size_t nl = response.find('\n', start);
    std::string_view line =
        trim(response.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    if (line.substr(0, 7) == "Action:") {
      std::string_view a = trim(line.substr(7));
      if (a.size() >= 2 && a.front() == '`' && a.back() == '`') a = trim(a.substr(1, a.size() - 2));
      found = std::string(a);
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return found;
}

TranscriptRecord run_strategy(const StrategyInput& input, Strategy strategy, Backend& backend) {
  TranscriptRecord t;
  t.task_id = input.task_id;
  t.strategy = strategy;
  t.backend = backend.descriptor();
  auto started = std::chrono::steady_clock::now();

  // Issues one call; returns false (and marks the transcript) on backend failure.
  auto call = [&](std::string prompt) {
    CallRecord rec;
    rec.prompt = std::move(prompt);
    try {
      Completion c = backend.complete(rec.prompt);
      rec.response = std::move(c.text);
      rec.latency_ms = c.latency_ms;
      rec.prompt_tokens = c.prompt_tokens;
      rec.completion_tokens = c.completion_tokens;
      rec.extracted = extract_blocks(rec.response);
    } catch (const BackendError& e) {
      rec.error = e.what();
      t.failure = std::string("backend-error: ") + e.what();
      t.calls.push_back(std::move(rec));
      return false;
    }
    t.calls.push_back(std::move(rec));
    return true;
  };

  switch (strategy) {
    case Strategy::Cot:
      if (call(render_prompt(strategy, Phase::Only, input.task_text))) t.final_plan = t.calls.back().extracted.plan_text;
      break;

    case Strategy::MfrSingleCall: {
      if (!call(render_prompt(strategy, Phase::Only, input.task_text))) break;
      const auto& extracted = t.calls.back().extracted;
      if (auto problem = modeling_problem(extracted.model_text)) {
        t.modeling_ok = false;
        t.failure = "modeling-failure: " + *problem;
        break;
      }
      t.final_plan = extracted.plan_text;
      break;
    }

    case Strategy::MfrTwoCall: {
      if (!call(render_prompt(strategy, Phase::One, input.task_text))) break;
      // Only the model block of the first response is carried forward.
      std::optional<std::string> model_text = t.calls.back().extracted.model_text;
      if (auto problem = modeling_problem(model_text)) {
        t.modeling_ok = false;
        t.failure = "modeling-failure: " + *problem;
        break;
      }
      if (call(render_prompt(strategy, Phase::Two, input.task_text, model_text)))
        t.final_plan = t.calls.back().extracted.plan_text;
      break;
    }

    case Strategy::React: {
      if (!input.reference_model) throw std::invalid_argument("react needs the task's reference model");
      const ProblemModel& env = *input.reference_model;
      const std::string preamble = render_prompt(strategy, Phase::Only, input.task_text);
      State state = initial_state(env);
      std::string history;
      std::string plan_text;
      int attempted = 0;
      for (int turn = 0; turn < kReactIterationCap; ++turn) {
        if (!call(preamble + history)) break;
        const std::string& response = t.calls.back().response;
        auto action = last_action_line(response);
        if (action && is_finish(*action)) break;

        ++attempted;
        std::string line = "step " + std::to_string(attempted) + ": " + (action ? *action : "<no action>");
        plan_text += line + "\n";
        PlanStep step = parse_plan(line).steps.front();
        step.index = attempted;

        std::string observation;
        auto result = execute_step(state, step, env);
        if (auto* violations = std::get_if<std::vector<Violation>>(&result)) {
          for (const auto& v : *violations) {
            if (!observation.empty()) observation += "; ";
            observation += std::string("VIOLATION ") + to_string(v.cls) + ": " + v.detail;
          }
        } else {
          State next = std::get<State>(std::move(result));
          for (const auto& change : describe_changes(state, next)) {
            if (!observation.empty()) observation += "; ";
            observation += change;
          }
          if (observation.empty()) observation = "no change";
          state = std::move(next);
        }
        t.observations.push_back(observation);
        history += "\n";
        history += trim(response);
        history += "\nObservation: " + observation + "\n";
      }
      if (!t.failure) t.final_plan = plan_text;
      break;
    }
  }
  t.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return t;
}

// ---------------------------------------------------------------------------

std::string transcript_to_json(const TranscriptRecord& t, bool include_timing) {
  ojson j;
  j["schema_version"] = t.schema_version;
  j["task_id"] = t.task_id;
  j["strategy"] = to_string(t.strategy);
  j["backend"] = t.backend;
  j["modeling_ok"] = t.modeling_ok;
  j["failure"] = opt(t.failure);
  j["final_plan"] = opt(t.final_plan);
  j["observations"] = t.observations;
  ojson calls = ojson::array();
  for (const auto& c : t.calls) {
    ojson cj;
    cj["prompt"] = c.prompt;
    cj["response"] = c.response;
    cj["error"] = opt(c.error);
    cj["prompt_tokens"] = opt(c.prompt_tokens);
    cj["completion_tokens"] = opt(c.completion_tokens);
    cj["extracted"] = {{"model_text", opt(c.extracted.model_text)},
                       {"plan_text", opt(c.extracted.plan_text)},
                       {"residue", c.extracted.residue}};
    if (include_timing) cj["latency_ms"] = c.latency_ms;
    calls.push_back(std::move(cj));
  }
  j["calls"] = std::move(calls);
  if (include_timing) j["wall_time_ms"] = t.wall_time_ms;
  return j.dump(2) + "\n";
}

TranscriptRecord transcript_from_json(std::string_view text) {
  TranscriptRecord t;
  try {
    ojson j = ojson::parse(text);
    t.schema_version = j.at("schema_version").get<int>();
    if (t.schema_version != kTranscriptSchemaVersion)
      throw std::runtime_error("unsupported transcript schema_version " + std::to_string(t.schema_version));
    t.task_id = j.at("task_id").get<std::string>();
    auto s = strategy_from_string(j.at("strategy").get<std::string>());
    if (!s) throw std::runtime_error("unknown strategy " + j.at("strategy").get<std::string>());
    t.strategy = *s;
    t.backend = j.at("backend").get<std::string>();
    t.modeling_ok = j.at("modeling_ok").get<bool>();
    t.failure = get_opt<std::string>(j, "failure");
    t.final_plan = get_opt<std::string>(j, "final_plan");
    if (j.contains("observations")) t.observations = j["observations"].get<std::vector<std::string>>();
    for (const auto& cj : j.at("calls")) {
      CallRecord c;
      c.prompt = cj.at("prompt").get<std::string>();
      c.response = cj.at("response").get<std::string>();
      c.error = get_opt<std::string>(cj, "error");
      c.prompt_tokens = get_opt<int>(cj, "prompt_tokens");
      c.completion_tokens = get_opt<int>(cj, "completion_tokens");
      if (cj.contains("extracted")) {
        const auto& e = cj["extracted"];
        c.extracted.model_text = get_opt<std::string>(e, "model_text");
        c.extracted.plan_text = get_opt<std::string>(e, "plan_text");
        c.extracted.residue = e.value("residue", "");
      }
      c.latency_ms = cj.value("latency_ms", 0.0);
      t.calls.push_back(std::move(c));
    }
    t.wall_time_ms = j.value("wall_time_ms", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed transcript: ") + e.what());
  }
  return t;
}

std::string scored_content_digest(const TranscriptRecord& t) {
  ojson j;
  j["task_id"] = t.task_id;
  j["strategy"] = to_string(t.strategy);
  j["modeling_ok"] = t.modeling_ok;
  j["final_plan"] = opt(t.final_plan);
  return sha256_hex(j.dump());
}

}  // namespace mfr
