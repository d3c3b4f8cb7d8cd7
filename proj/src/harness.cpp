#include "mfr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

namespace mfr {

using ojson = nlohmann::ordered_json;

namespace {

constexpr Strategy kStrategyOrder[] = {Strategy::Cot, Strategy::React, Strategy::MfrTwoCall, Strategy::MfrSingleCall};

constexpr std::pair<Criterion, const char*> kCriteria[] = {
    {Criterion::ConstraintViolations, "constraint_violations"},
    {Criterion::ImplicitAssumptions, "implicit_assumptions"},
    {Criterion::StructuralClarity, "structural_clarity"},
};

double round6(double x) { return std::round(x * 1e6) / 1e6; }

/// Threshold keys, in the order they are written back.
const std::vector<std::pair<const char*, double Thresholds::*>>& threshold_fields() {
  static const std::vector<std::pair<const char*, double Thresholds::*>> fields = {
      {"violations_low", &Thresholds::violations_low},
      {"violations_medium", &Thresholds::violations_medium},
      {"violations_medium_high", &Thresholds::violations_medium_high},
      {"assumptions_rare", &Thresholds::assumptions_rare},
      {"assumptions_occasional", &Thresholds::assumptions_occasional},
      {"clarity_low", &Thresholds::clarity_low},
      {"clarity_medium", &Thresholds::clarity_medium},
      {"clarity_medium_high", &Thresholds::clarity_medium_high},
  };
  return fields;
}

ojson score_json(const TaskScore& s) {
  ojson j;
  j["task_id"] = s.task_id;
  j["strategy"] = to_string(s.strategy);
  j["modeling_ok"] = s.modeling_ok;
  j["constraint_violations"] = s.constraint_violations;
  j["implicit_assumptions"] = s.implicit_assumptions;
  j["precondition_failures"] = s.precondition_failures;
  j["goal_success"] = s.goal_success;
  j["clarity"] = round6(s.clarity);
  j["plan_length"] = s.plan_length;
  return j;
}

TaskScore score_from_json(const ojson& j) {
  TaskScore s;
  s.task_id = j.at("task_id").get<std::string>();
  auto strategy = strategy_from_string(j.at("strategy").get<std::string>());
  if (!strategy) throw std::runtime_error("unknown strategy in scores");
  s.strategy = *strategy;
  s.modeling_ok = j.at("modeling_ok").get<bool>();
  s.constraint_violations = j.at("constraint_violations").get<int>();
  s.implicit_assumptions = j.at("implicit_assumptions").get<int>();
  s.precondition_failures = j.at("precondition_failures").get<int>();
  s.goal_success = j.at("goal_success").get<bool>();
  s.clarity = j.at("clarity").get<double>();
  s.plan_length = j.at("plan_length").get<int>();
  return s;
}

ojson thresholds_json(const Thresholds& t) {
  ojson j;
  for (const auto& [key, member] : threshold_fields()) j[key] = t.*member;
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

const char* to_string(Criterion c) {
  for (const auto& [v, name] : kCriteria)
    if (v == c) return name;
  return "?";
}

std::optional<Criterion> criterion_from_string(std::string_view s) {
  for (const auto& [v, name] : kCriteria)
    if (s == name) return v;
  if (s == "constraint-violations") return Criterion::ConstraintViolations;
  if (s == "implicit-assumptions") return Criterion::ImplicitAssumptions;
  if (s == "clarity" || s == "structural-clarity") return Criterion::StructuralClarity;
  return std::nullopt;
}

std::string to_string(const QualitativeRating& r) {
  if (const auto* l = std::get_if<Level>(&r.value)) {
    switch (*l) {
      case Level::Low:
        return "Low";
      case Level::Medium:
        return "Medium";
      case Level::MediumHigh:
        return "Medium-High";
      case Level::High:
        return "High";
    }
  }
  switch (std::get<Frequency>(r.value)) {
    case Frequency::Rare:
      return "Rare";
    case Frequency::Occasional:
      return "Occasional";
    case Frequency::Frequent:
      return "Frequent";
  }
  return "?";
}

std::optional<QualitativeRating> parse_rating(std::string_view s) {
  std::string norm(s);
  // en dash (U+2013) to hyphen
  for (std::size_t p; (p = norm.find("\xE2\x80\x93")) != std::string::npos;) norm.replace(p, 3, "-");
  if (norm == "Low") return QualitativeRating{Level::Low};
  if (norm == "Medium" || norm == "Medium-Low") return QualitativeRating{Level::Medium};
  if (norm == "Medium-High") return QualitativeRating{Level::MediumHigh};
  if (norm == "High") return QualitativeRating{Level::High};
  if (norm == "Rare") return QualitativeRating{Frequency::Rare};
  if (norm == "Occasional") return QualitativeRating{Frequency::Occasional};
  if (norm == "Frequent") return QualitativeRating{Frequency::Frequent};
  return std::nullopt;
}

Thresholds parse_thresholds(std::string_view text) {
  Thresholds t;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto eq = line.find('=');
    auto strip = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    if (strip(line).empty()) continue;
    if (eq == std::string::npos) throw std::invalid_argument("thresholds line " + std::to_string(line_no) + ": expected key=value");
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    auto field = std::find_if(threshold_fields().begin(), threshold_fields().end(),
                              [&](const auto& f) { return key == f.first; });
    if (field == threshold_fields().end()) throw std::invalid_argument("unknown threshold key '" + key + "'");
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size())
      throw std::invalid_argument("threshold '" + key + "' needs a number, got '" + value + "'");
    t.*(field->second) = v;
  }
  return t;
}

QualitativeRating map_to_qualitative(Criterion criterion, double v, const Thresholds& t) {
  switch (criterion) {
    case Criterion::ConstraintViolations:
      if (v <= t.violations_low) return {Level::Low};
      if (v <= t.violations_medium) return {Level::Medium};
      if (v <= t.violations_medium_high) return {Level::MediumHigh};
      return {Level::High};
    case Criterion::ImplicitAssumptions:
      if (v <= t.assumptions_rare) return {Frequency::Rare};
      if (v <= t.assumptions_occasional) return {Frequency::Occasional};
      return {Frequency::Frequent};
    case Criterion::StructuralClarity:
      if (v < t.clarity_low) return {Level::Low};
      if (v < t.clarity_medium) return {Level::Medium};
      if (v < t.clarity_medium_high) return {Level::MediumHigh};
      return {Level::High};
  }
  throw std::invalid_argument("unknown criterion");
}

int qualitative_to_numeric(const QualitativeRating& rating) {
  if (const auto* l = std::get_if<Level>(&rating.value)) {
    switch (*l) {
      case Level::Low:
        return 1;
      case Level::Medium:
        return 2;
      case Level::MediumHigh:
        return 3;
      case Level::High:
        return 4;
    }
  }
  switch (std::get<Frequency>(rating.value)) {
    case Frequency::Rare:
      return 1;
    case Frequency::Occasional:
      return 2;
    case Frequency::Frequent:
      return 3;
  }
  return 0;
}

TaskScore score_transcript(const Task& task, const TranscriptRecord& transcript) {
  TaskScore s;
  s.task_id = task.id;
  s.strategy = transcript.strategy;
  s.modeling_ok = transcript.modeling_ok;

  const bool has_plan = transcript.modeling_ok && transcript.final_plan.has_value();
  Plan plan = has_plan ? parse_plan(*transcript.final_plan) : Plan{};
  auto report = validate_plan(task.reference_model, plan, ValidationMode::ContinueAndSkip);
  for (const auto& v : report.violations) {
    switch (v.cls) {
      case ViolationClass::ConstraintViolation:
        ++s.constraint_violations;
        break;
      case ViolationClass::UndefinedAction:
      case ViolationClass::ArityMismatch:
      case ViolationClass::UndefinedEntity:
      case ViolationClass::UnparsedStep:
        ++s.implicit_assumptions;
        break;
      case ViolationClass::PreconditionFailure:
        ++s.precondition_failures;
        break;
      default:
        break;
    }
  }
  s.plan_length = static_cast<int>(plan.steps.size());
  s.goal_success = has_plan && report.goal_satisfied;
  if (!plan.steps.empty()) {
    auto parsed = std::count_if(plan.steps.begin(), plan.steps.end(), [](const PlanStep& p) { return p.parsed.has_value(); });
    s.clarity = static_cast<double>(parsed) / static_cast<double>(plan.steps.size());
  }
  return s;
}

std::vector<StrategySummary> aggregate(const std::vector<TaskScore>& scores, const Thresholds& t) {
  if (scores.empty()) throw AggregationError("no scores to aggregate");
  std::map<Strategy, std::vector<const TaskScore*>> by_strategy;
  for (const auto& s : scores) by_strategy[s.strategy].push_back(&s);

  std::optional<std::multiset<std::string>> task_set;
  for (const auto& [strategy, list] : by_strategy) {
    std::multiset<std::string> ids;
    for (const auto* s : list) ids.insert(s->task_id);
    if (task_set && *task_set != ids)
      throw AggregationError(std::string("strategy ") + to_string(strategy) + " was scored on a different task set");
    task_set = std::move(ids);
  }

  std::vector<StrategySummary> out;
  for (Strategy strategy : kStrategyOrder) {
    auto it = by_strategy.find(strategy);
    if (it == by_strategy.end()) continue;
    const auto& list = it->second;
    StrategySummary sum;
    sum.strategy = strategy;
    sum.n_tasks = static_cast<int>(list.size());
    double n = static_cast<double>(list.size());
    for (const auto* s : list) {
      sum.mean_constraint_violations += s->constraint_violations;
      sum.mean_implicit_assumptions += s->implicit_assumptions;
      sum.mean_clarity += s->clarity;
      sum.mean_precondition_failures += s->precondition_failures;
      sum.goal_success_rate += s->goal_success ? 1.0 : 0.0;
    }
    sum.mean_constraint_violations = round6(sum.mean_constraint_violations / n);
    sum.mean_implicit_assumptions = round6(sum.mean_implicit_assumptions / n);
    sum.mean_clarity = round6(sum.mean_clarity / n);
    sum.mean_precondition_failures = round6(sum.mean_precondition_failures / n);
    sum.goal_success_rate = round6(sum.goal_success_rate / n);
    sum.constraint_violations = map_to_qualitative(Criterion::ConstraintViolations, sum.mean_constraint_violations, t);
    sum.implicit_assumptions = map_to_qualitative(Criterion::ImplicitAssumptions, sum.mean_implicit_assumptions, t);
    sum.structural_clarity = map_to_qualitative(Criterion::StructuralClarity, sum.mean_clarity, t);
    sum.numeric_constraint_violations = qualitative_to_numeric(sum.constraint_violations);
    sum.numeric_implicit_assumptions = qualitative_to_numeric(sum.implicit_assumptions);
    sum.numeric_structural_clarity = qualitative_to_numeric(sum.structural_clarity);
    out.push_back(sum);
  }
  return out;
}

const char* display_name(Strategy s) {
  switch (s) {
    case Strategy::Cot:
      return "CoT";
    case Strategy::React:
      return "ReAct";
    case Strategy::MfrTwoCall:
      return "Model-First";
    case Strategy::MfrSingleCall:
      return "Model-First (single call)";
  }
  return "?";
}

std::string render_report_json(const ReportInputs& in) {
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["generated_from"] = in.generated_from;
  ojson tasks = ojson::array();
  for (const auto& s : in.scores) tasks.push_back(score_json(s));
  j["tasks"] = std::move(tasks);
  ojson summaries = ojson::array();
  for (const auto& s : in.summaries) {
    ojson sj;
    sj["strategy"] = to_string(s.strategy);
    sj["display_name"] = display_name(s.strategy);
    sj["n_tasks"] = s.n_tasks;
    sj["mean"] = {{"constraint_violations", s.mean_constraint_violations},
                  {"implicit_assumptions", s.mean_implicit_assumptions},
                  {"structural_clarity", s.mean_clarity},
                  {"precondition_failures", s.mean_precondition_failures},
                  {"goal_success_rate", s.goal_success_rate}};
    sj["rating"] = {{"constraint_violations", to_string(s.constraint_violations)},
                    {"implicit_assumptions", to_string(s.implicit_assumptions)},
                    {"structural_clarity", to_string(s.structural_clarity)}};
    sj["numeric_level"] = {{"constraint_violations", s.numeric_constraint_violations},
                           {"implicit_assumptions", s.numeric_implicit_assumptions},
                           {"structural_clarity", s.numeric_structural_clarity}};
    summaries.push_back(std::move(sj));
  }
  j["summaries"] = std::move(summaries);
  j["thresholds"] = thresholds_json(in.thresholds);
  j["definitions"] = {
      {"constraint_violations", "ConstraintViolation count per task, continue-and-skip validation against the reference model"},
      {"implicit_assumptions", "UndefinedAction + ArityMismatch + UndefinedEntity + UnparsedStep count per task"},
      {"structural_clarity", "fraction of plan steps matching `step N: action(args)`; 0 when no plan was produced"},
      {"numeric_level", "Low=1, Medium=2, Medium-High=3, High=4; Rare=1, Occasional=2, Frequent=3"}};
  return j.dump(2) + "\n";
}

std::string render_table(const std::vector<StrategySummary>& summaries) {
  const std::vector<std::string> header = {"Reasoning Strategy", "Constraint Violations", "Implicit Assumptions",
                                           "Structural Clarity"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : summaries)
    rows.push_back({display_name(s.strategy), to_string(s.constraint_violations), to_string(s.implicit_assumptions),
                    to_string(s.structural_clarity)});
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      line += cells[c];
      if (c + 1 < cells.size()) line += std::string(width[c] - cells[c].size() + 2, ' ');
    }
    out << line << "\n";
  };
  emit(header);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out << std::string(total - 2, '-') << "\n";
  for (const auto& r : rows) emit(r);
  return out.str();
}

std::string render_plot_csv(const std::vector<StrategySummary>& summaries) {
  std::string out = "strategy,criterion,numeric_level\n";
  for (const auto& s : summaries) {
    std::string name = display_name(s.strategy);
    out += name + ",constraint_violations," + std::to_string(s.numeric_constraint_violations) + "\n";
    out += name + ",implicit_assumptions," + std::to_string(s.numeric_implicit_assumptions) + "\n";
    out += name + ",structural_clarity," + std::to_string(s.numeric_structural_clarity) + "\n";
  }
  return out;
}

ReportFiles emit_report(const ReportInputs& in, const std::filesystem::path& destination) {
  std::error_code ec;
  std::filesystem::create_directories(destination, ec);
  if (ec) throw std::runtime_error("cannot create " + destination.string() + ": " + ec.message());
  ReportFiles files{destination / "report.json", destination / "table.txt", destination / "plot.csv"};
  write_file(files.report_json, render_report_json(in));
  write_file(files.table_txt, render_table(in.summaries));
  write_file(files.plot_csv, render_plot_csv(in.summaries));
  return files;
}

std::string render_scores_json(const std::vector<TaskScore>& scores, const std::vector<std::string>& generated_from) {
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["generated_from"] = generated_from;
  ojson tasks = ojson::array();
  for (const auto& s : scores) tasks.push_back(score_json(s));
  j["tasks"] = std::move(tasks);
  return j.dump(2) + "\n";
}

ReportInputs read_scores(std::string_view json_text) {
  ReportInputs in;
  try {
    ojson j = ojson::parse(json_text);
    if (j.value("schema_version", 0) != kReportSchemaVersion) throw std::runtime_error("unsupported scores schema_version");
    for (const auto& t : j.at("tasks")) in.scores.push_back(score_from_json(t));
    if (j.contains("generated_from")) in.generated_from = j["generated_from"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed scores file: ") + e.what());
  }
  return in;
}

}  // namespace mfr
