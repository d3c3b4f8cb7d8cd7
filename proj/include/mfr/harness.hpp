#pragma once

// Scoring of transcripts against the three evaluation criteria, the
// qualitative bands, and the table / plot-data report writers.

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mfr/corpus.hpp"
#include "mfr/pipeline.hpp"

namespace mfr {

inline constexpr int kReportSchemaVersion = 1;

struct TaskScore {
  std::string task_id;
  Strategy strategy = Strategy::Cot;
  bool modeling_ok = true;
  int constraint_violations = 0;
  /// UndefinedAction + ArityMismatch + UndefinedEntity + UnparsedStep
  int implicit_assumptions = 0;
  int precondition_failures = 0;
  bool goal_success = false;
  double clarity = 0.0;  // parsed steps / total steps; 0 without a plan
  int plan_length = 0;
  friend bool operator==(const TaskScore&, const TaskScore&) = default;
};

enum class Criterion { ConstraintViolations, ImplicitAssumptions, StructuralClarity };

const char* to_string(Criterion c);
std::optional<Criterion> criterion_from_string(std::string_view s);

enum class Level { Low, Medium, MediumHigh, High };
enum class Frequency { Rare, Occasional, Frequent };

struct QualitativeRating {
  std::variant<Level, Frequency> value;
  friend bool operator==(const QualitativeRating&, const QualitativeRating&) = default;
};

std::string to_string(const QualitativeRating& r);

/// Accepts the level and frequency words. "Medium-Low" (with a hyphen or an
/// en dash) reads as Medium, the level it is plotted at.
std::optional<QualitativeRating> parse_rating(std::string_view s);

/// Upper band edges. Count criteria use inclusive upper edges; clarity uses
/// strict `<` edges.
struct Thresholds {
  double violations_low = 0.25;
  double violations_medium = 1.0;
  double violations_medium_high = 2.0;
  double assumptions_rare = 0.25;
  double assumptions_occasional = 1.0;
  double clarity_low = 0.4;
  double clarity_medium = 0.7;
  double clarity_medium_high = 0.9;
};

/// `key=value` lines (keys as the field names above); `#` comments allowed.
/// Throws std::invalid_argument on unknown keys or bad numbers.
Thresholds parse_thresholds(std::string_view text);

QualitativeRating map_to_qualitative(Criterion criterion, double mean_value, const Thresholds& t = {});

/// Low=1, Medium=2, Medium-High=3, High=4; Rare=1, Occasional=2, Frequent=3.
int qualitative_to_numeric(const QualitativeRating& rating);

/// Validates the transcript's final plan against the task's reference model
/// in continue-and-skip mode and counts violations per criterion.
TaskScore score_transcript(const Task& task, const TranscriptRecord& transcript);

struct StrategySummary {
  Strategy strategy = Strategy::Cot;
  int n_tasks = 0;
  double mean_constraint_violations = 0;
  double mean_implicit_assumptions = 0;
  double mean_clarity = 0;
  double mean_precondition_failures = 0;
  double goal_success_rate = 0;
  QualitativeRating constraint_violations;
  QualitativeRating implicit_assumptions;
  QualitativeRating structural_clarity;
  int numeric_constraint_violations = 0;
  int numeric_implicit_assumptions = 0;
  int numeric_structural_clarity = 0;
};

class AggregationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-strategy means, ratings and numeric levels, in the order cot, react,
/// mfr-two-call, mfr-single-call. Throws AggregationError on an empty input or
/// when strategies were scored on different task sets.
std::vector<StrategySummary> aggregate(const std::vector<TaskScore>& scores, const Thresholds& t = {});

/// Display name used in tables and plot data.
const char* display_name(Strategy s);

struct ReportInputs {
  std::vector<TaskScore> scores;
  std::vector<StrategySummary> summaries;
  std::vector<std::string> generated_from;  // transcript digests
  Thresholds thresholds;
};

std::string render_report_json(const ReportInputs& in);
std::string render_table(const std::vector<StrategySummary>& summaries);
std::string render_plot_csv(const std::vector<StrategySummary>& summaries);

struct ReportFiles {
  std::filesystem::path report_json;
  std::filesystem::path table_txt;
  std::filesystem::path plot_csv;
};

/// Writes report.json, table.txt and plot.csv into `destination`. Throws
/// std::runtime_error on I/O failure.
ReportFiles emit_report(const ReportInputs& in, const std::filesystem::path& destination);

/// Reads `tasks` (and `generated_from`, if present) from a scores or report
/// JSON document.
ReportInputs read_scores(std::string_view json_text);
std::string render_scores_json(const std::vector<TaskScore>& scores, const std::vector<std::string>& generated_from);

}  // namespace mfr
