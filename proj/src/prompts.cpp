#include <stdexcept>

#include "mfr/pipeline.hpp"

namespace mfr {

namespace {

constexpr std::string_view kModelInstruction =
    "Analyze the following problem. First, explicitly define the problem model by listing:\n"
    "(1) relevant entities,\n"
    "(2) state variables,\n"
    "(3) possible actions with preconditions and effects,\n"
    "and (4) constraints.\n"
    "Do not propose a solution yet.\n";

constexpr std::string_view kReasoningInstruction =
    "Using only the model defined above, generate a step-by-step solution plan. "
    "Ensure that all actions respect the defined constraints and state transitions.\n";

constexpr std::string_view kModelFormat =
    "Write the model as one fenced code block tagged `mdl`, one declaration per line:\n"
    "  model \"NAME\"\n"
    "  entity SORT: member1, member2, ...\n"
    "  var NAME(SORT, ...): bool|{value1, value2, ...}|int[LO..HI] = INITIAL\n"
    "  init NAME(member, ...) = VALUE\n"
    "  action NAME(param: SORT, ...)\n"
    "    pre TERM OP TERM\n"
    "    eff VAR := TERM  or  eff VAR := VAR + N  or  eff VAR := VAR - N\n"
    "  constraint always TERM OP TERM\n"
    "  goal TERM OP TERM\n"
    "OP is one of == != < <= > >=. A TERM is a variable such as at(n) or fuel, an action parameter,\n"
    "an entity or enumeration value, an integer, true or false. Repeat `pre`, `constraint` and `goal`\n"
    "lines for conjunctions.\n";

constexpr std::string_view kPlanFormat =
    "Give the plan as one fenced code block tagged `plan`, one step per line, written as\n"
    "`step N: action(arg1, arg2, ...)` using the action and entity names of the problem.\n";

constexpr std::string_view kCotInstruction =
    "Solve the following problem. Think step by step: reason through the situation carefully "
    "before committing to an answer.\n";

constexpr std::string_view kReactInstruction =
    "Solve the following problem by interacting with its environment in a loop of Thought, Action "
    "and Observation.\n"
    "Thought: reason about the current situation.\n"
    "Action: exactly one action written as `name(arg1, arg2, ...)`, or `finish` when the task is "
    "complete.\n"
    "The environment answers each Action with an Observation describing the state change, or the "
    "rule the action broke (in which case nothing changed).\n"
    "Write one Thought and one Action per turn, then stop and wait for the Observation.\n";

std::string section(std::string_view title, std::string_view body) {
  std::string out(title);
  out += ":\n";
  out += body;
  if (!body.empty() && body.back() != '\n') out += '\n';
  return out;
}

}  // namespace

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::MfrTwoCall:
      return "mfr-two-call";
    case Strategy::MfrSingleCall:
      return "mfr-single-call";
    case Strategy::Cot:
      return "cot";
    case Strategy::React:
      return "react";
  }
  return "?";
}

std::optional<Strategy> strategy_from_string(std::string_view s) {
  for (Strategy v : {Strategy::MfrTwoCall, Strategy::MfrSingleCall, Strategy::Cot, Strategy::React})
    if (s == to_string(v)) return v;
  return std::nullopt;
}

std::string render_prompt(Strategy strategy, Phase phase, std::string_view task_text,
                          const std::optional<std::string>& model_text) {
  std::string p;
  switch (strategy) {
    case Strategy::MfrTwoCall:
      if (phase == Phase::One) {
        p += kModelInstruction;
        p += "\n" + section("Problem", task_text);
        p += "\n";
        p += kModelFormat;
        return p;
      }
      if (phase == Phase::Two) {
        if (!model_text) throw std::invalid_argument("phase 2 prompt needs the model text");
        p += section("Problem", task_text);
        p += "\nModel:\n```mdl\n" + *model_text;
        if (!model_text->empty() && model_text->back() != '\n') p += '\n';
        p += "```\n\n";
        p += kReasoningInstruction;
        p += "\n";
        p += kPlanFormat;
        return p;
      }
      throw std::invalid_argument("mfr-two-call uses phases 1 and 2");
    case Strategy::MfrSingleCall:
      if (phase != Phase::Only) throw std::invalid_argument("mfr-single-call uses a single prompt");
      p += kModelInstruction;
      p += "\n" + section("Problem", task_text);
      p += "\n";
      p += kModelFormat;
      p += "\nThen, after the model block:\n";
      p += kReasoningInstruction;
      p += kPlanFormat;
      return p;
    case Strategy::Cot:
      if (phase != Phase::Only) throw std::invalid_argument("cot uses a single prompt");
      p += kCotInstruction;
      p += "\n" + section("Problem", task_text);
      p += "\nAfter your reasoning:\n";
      p += kPlanFormat;
      return p;
    case Strategy::React:
      if (phase != Phase::Only) throw std::invalid_argument("react uses a single prompt");
      p += kReactInstruction;
      p += "\n" + section("Problem", task_text);
      return p;
  }
  throw std::invalid_argument("unknown strategy");
}

}  // namespace mfr
