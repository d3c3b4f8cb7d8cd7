#pragma once

// Prompt templates, text-completion backends (live HTTP and fixture replay),
// the four strategy runners, and transcript persistence.

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mfr/mdl.hpp"
#include "mfr/model.hpp"

namespace mfr {

enum class Strategy { MfrTwoCall, MfrSingleCall, Cot, React };

const char* to_string(Strategy s);
std::optional<Strategy> strategy_from_string(std::string_view s);

enum class Phase { One, Two, Only };

/// Deterministic prompt text. Phase Two requires `model_text`; CoT and ReAct
/// use Phase Only. Throws std::invalid_argument on a bad combination.
std::string render_prompt(Strategy strategy, Phase phase, std::string_view task_text,
                          const std::optional<std::string>& model_text = std::nullopt);

// ---------------------------------------------------------------------------
// Backends

struct BackendConfig {
  enum class Kind { Live, Replay };
  Kind kind = Kind::Replay;
  std::string endpoint;    // live
  std::string model_name;  // live
  std::string api_key;     // live; usually from MFRKIT_API_KEY
  std::string fixture_path;  // replay
  double temperature = 0.0;
  int max_output_tokens = 2048;
  std::chrono::milliseconds timeout{60'000};
  int retries = 2;
  std::chrono::milliseconds backoff{500};  // first retry delay; doubles per attempt
};

/// Throws std::invalid_argument when required fields are missing.
void validate_config(const BackendConfig& config);

class BackendError : public std::runtime_error {
 public:
  BackendError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  /// HTTP status, or 0 for transport failures and replay misses.
  int status() const { return status_; }

 private:
  int status_;
};

class MissingFixture : public BackendError {
 public:
  explicit MissingFixture(std::string digest)
      : BackendError(0, "no replay fixture for prompt digest " + digest), digest_(std::move(digest)) {}
  const std::string& digest() const { return digest_; }

 private:
  std::string digest_;
};

struct Completion {
  std::string text;
  double latency_ms = 0;
  std::optional<int> prompt_tokens;
  std::optional<int> completion_tokens;
};

/// A text-completion service. Implementations must tolerate concurrent
/// complete() calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual Completion complete(const std::string& prompt) = 0;
  /// Stable description recorded in transcripts (no timing, no secrets).
  virtual std::string descriptor() const = 0;
};

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// Replay lookup key: SHA-256 of the prompt with CRLF normalized to LF,
/// trailing whitespace stripped from each line, and trailing blank lines
/// removed.
std::string prompt_key(std::string_view prompt);

class ReplayBackend : public Backend {
 public:
  /// Reads a JSONL fixture of `{"key": ..., "response": ...}` records.
  explicit ReplayBackend(const std::string& fixture_path);
  ReplayBackend(std::unordered_map<std::string, std::string> table, std::string name);

  Completion complete(const std::string& prompt) override;
  std::string descriptor() const override { return "replay:" + name_; }
  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, std::string> table_;
  std::string name_;
};

class LiveBackend : public Backend {
 public:
  explicit LiveBackend(BackendConfig config);
  Completion complete(const std::string& prompt) override;
  std::string descriptor() const override;

 private:
  BackendConfig config_;
  std::string base_;
  std::string path_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

/// One-shot completion through a freshly constructed backend.
Completion complete(const BackendConfig& config, const std::string& prompt);

// ---------------------------------------------------------------------------
// Transcripts

inline constexpr int kTranscriptSchemaVersion = 1;

struct CallRecord {
  std::string prompt;
  std::string response;
  double latency_ms = 0;
  std::optional<int> prompt_tokens;
  std::optional<int> completion_tokens;
  ExtractedArtifacts extracted;
  std::optional<std::string> error;
};

struct TranscriptRecord {
  int schema_version = kTranscriptSchemaVersion;
  std::string task_id;
  Strategy strategy = Strategy::Cot;
  std::string backend;
  std::vector<CallRecord> calls;
  bool modeling_ok = true;
  std::optional<std::string> failure;  // "modeling-failure: ..." or "backend-error: ..."
  /// The plan that gets scored; absent when the final response carried none.
  std::optional<std::string> final_plan;
  /// ReAct only: one entry per loop turn, the observation text returned.
  std::vector<std::string> observations;
  double wall_time_ms = 0;
};

/// Pretty JSON with a fixed key order. Timing fields are omitted when
/// `include_timing` is false.
std::string transcript_to_json(const TranscriptRecord& t, bool include_timing = true);
/// Throws std::runtime_error on malformed input or unsupported schema_version.
TranscriptRecord transcript_from_json(std::string_view text);

/// Digest of the fields that scoring reads: task, strategy, modeling outcome
/// and final plan.
std::string scored_content_digest(const TranscriptRecord& t);

// ---------------------------------------------------------------------------
// Strategy runs

inline constexpr int kReactIterationCap = 15;

struct StrategyInput {
  std::string task_id;
  std::string task_text;
  /// Environment for ReAct; never shown to the MFR strategies.
  const ProblemModel* reference_model = nullptr;
};

TranscriptRecord run_strategy(const StrategyInput& input, Strategy strategy, Backend& backend);

/// Action text of the last `Action:` line, if any.
std::optional<std::string> last_action_line(std::string_view response);

}  // namespace mfr
