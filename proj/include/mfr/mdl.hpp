#pragma once

// Model Definition Language (MDL) reader/writer, tolerant plan parsing, and
// extraction of fenced artifacts from raw LLM output.
//
// MDL is line-oriented; `#` starts a comment and indentation is ignored:
//
//   model "NAME"
//   entity SORT: m1, m2, ...
//   var NAME(SORT, ...): bool|{e1,e2,...}|int[LO..HI] = INIT
//   init NAME(member, ...) = VALUE
//   action NAME(p1: SORT, ...)
//     pre COMPARISON
//     eff VARREF := TERM | VARREF := VARREF +/- INT
//   constraint always COMPARISON
//   goal COMPARISON

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mfr/model.hpp"

namespace mfr {

enum class ParseIssueKind { Syntax, UnknownKeyword, MalformedTerm };

const char* to_string(ParseIssueKind k);

struct ParseIssue {
  int line = 0;    // 1-based
  int column = 0;  // 1-based
  ParseIssueKind kind = ParseIssueKind::Syntax;
  std::string message;
};

/// Either a structurally complete model or the issues that prevented one.
class ParseResult {
 public:
  ParseResult(ProblemModel model) : value_(std::move(model)) {}
  ParseResult(std::vector<ParseIssue> issues) : value_(std::move(issues)) {}

  bool ok() const { return std::holds_alternative<ProblemModel>(value_); }
  explicit operator bool() const { return ok(); }
  const ProblemModel& model() const { return std::get<ProblemModel>(value_); }
  ProblemModel& model() { return std::get<ProblemModel>(value_); }
  const std::vector<ParseIssue>& issues() const { return std::get<std::vector<ParseIssue>>(value_); }

 private:
  std::variant<ProblemModel, std::vector<ParseIssue>> value_;
};

ParseResult parse_model(std::string_view text);

/// Canonical text: model line, sorts, variables, inits, actions, constraints,
/// goal. Empty sections are omitted. Reparses to an equal model.
std::string serialize_model(const ProblemModel& model);

struct ParsedStep {
  std::string action;
  std::vector<std::string> args;
  friend bool operator==(const ParsedStep&, const ParsedStep&) = default;
};

struct PlanStep {
  int index = 0;  // 1-based position within the plan
  std::string raw;
  std::optional<ParsedStep> parsed;
  friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

struct Plan {
  std::vector<PlanStep> steps;
  friend bool operator==(const Plan&, const Plan&) = default;
};

/// Never fails. Each nonempty line is a step; lines of the form
/// `step N: name(args)` get `parsed` populated.
Plan parse_plan(std::string_view text);

/// Parses a bare action invocation `name(arg, ...)`.
std::optional<ParsedStep> parse_invocation(std::string_view text);

/// Renders `step N: name(args)` lines, one per step; unparsed steps keep
/// their raw text.
std::string format_plan(const Plan& plan);

/// Builds a plan from parsed invocations, numbering steps from 1.
Plan make_plan(const std::vector<ParsedStep>& steps);

struct ExtractedArtifacts {
  std::optional<std::string> model_text;
  std::optional<std::string> plan_text;
  std::string residue;
  friend bool operator==(const ExtractedArtifacts&, const ExtractedArtifacts&) = default;
};

/// Recognizes ```mdl and ```plan fences; the last fence of each tag wins.
/// Everything outside recognized fences (including untagged fences) is
/// residue.
ExtractedArtifacts extract_blocks(std::string_view llm_output);

bool is_identifier(std::string_view s);

}  // namespace mfr
