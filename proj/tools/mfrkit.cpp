// mfrkit command-line tool.
//
// Exit codes: 0 success, 1 domain failure, 2 usage error, 3 backend / IO error.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <thread>

#include "mfr/checker.hpp"
#include "mfr/corpus.hpp"
#include "mfr/harness.hpp"
#include "mfr/mdl.hpp"
#include "mfr/oracle.hpp"
#include "mfr/pipeline.hpp"
#include "mfr/validator.hpp"

namespace fs = std::filesystem;
using namespace mfr;

namespace {

constexpr int kOk = 0;
constexpr int kDomain = 1;
constexpr int kUsage = 2;
constexpr int kIo = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  try {
    return read_file(path);
  } catch (const CorpusError& e) {
    throw IoError(e.what());
  }
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw IoError("cannot write " + path.string());
}

/// Parses a model file; prints issues and returns nullopt on failure.
std::optional<ProblemModel> load_model(const std::string& path) {
  ParseResult r = parse_model(slurp(path));
  if (r) return std::move(r.model());
  for (const auto& i : r.issues())
    std::cerr << path << ":" << i.line << ":" << i.column << ": " << to_string(i.kind) << ": " << i.message << "\n";
  return std::nullopt;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

// ---------------------------------------------------------------------------

int cmd_parse(const std::string& file) {
  auto model = load_model(file);
  if (!model) return kDomain;
  std::cout << serialize_model(*model);
  return kOk;
}

int cmd_check(const std::string& file) {
  auto model = load_model(file);
  if (!model) return kDomain;
  auto issues = check_model(*model);
  for (const auto& i : issues) std::cout << format_issue(i) << "\n";
  return issues.empty() ? kOk : kDomain;
}

int cmd_validate(const std::string& model_file, const std::string& plan_file, const std::string& mode) {
  auto model = load_model(model_file);
  if (!model) return kDomain;
  Plan plan = parse_plan(slurp(plan_file));
  auto m = mode == "halt" ? ValidationMode::HaltOnFirst : ValidationMode::ContinueAndSkip;
  auto report = validate_plan(*model, plan, m);
  std::cout << trace_render(report, *model, plan);
  return report.violations.empty() && report.goal_satisfied ? kOk : kDomain;
}

int cmd_solve(const std::string& model_file, int max_depth) {
  auto model = load_model(model_file);
  if (!model) return kDomain;
  if (auto issues = check_model(*model); !issues.empty()) {
    for (const auto& i : issues) std::cerr << format_issue(i) << "\n";
    return kDomain;
  }
  SolveResult r;
  try {
    r = solve(*model, max_depth);
  } catch (const CeilingExceeded& e) {
    std::cerr << "search ceiling exceeded: " << e.what() << "\n";
    return kDomain;
  }
  if (r.plan) std::cout << format_plan(*r.plan);
  else std::cout << "no plan within depth " << max_depth << "\n";
  std::cout << "expanded=" << r.stats.states_expanded << " frontier=" << r.stats.frontier_peak
            << " depth=" << r.stats.depth_reached << "\n";
  return r.plan ? kOk : kDomain;
}

int cmd_tasks(const fs::path& corpus) {
  for (const auto& id : list_tasks(corpus)) {
    Task t = load_task(id, corpus);
    std::cout << id << " " << to_string(t.family) << "\n";
  }
  return kOk;
}

struct RunOptions {
  std::string task;
  std::string strategy;
  std::string backend = "replay";
  std::string fixture;
  std::string out;
  std::string model_name;
  bool timing = false;
};

int cmd_run(const RunOptions& o, const fs::path& corpus, const std::string& endpoint) {
  auto strategy = strategy_from_string(o.strategy);
  if (!strategy) throw UsageError("unknown strategy '" + o.strategy + "'");
  Task task = load_task(o.task, corpus);

  BackendConfig config;
  if (o.backend == "replay") {
    config.kind = BackendConfig::Kind::Replay;
    config.fixture_path = o.fixture;
  } else {
    config.kind = BackendConfig::Kind::Live;
    config.endpoint = endpoint.empty() ? env_or("MFRKIT_ENDPOINT", "") : endpoint;
    config.api_key = env_or("MFRKIT_API_KEY", "");
    config.model_name = o.model_name;
  }
  try {
    validate_config(config);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::unique_ptr<Backend> backend;
  try {
    backend = make_backend(config);
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }

  StrategyInput input{task.id, task.nl_description, &task.reference_model};
  TranscriptRecord t = run_strategy(input, *strategy, *backend);
  std::string json = transcript_to_json(t, o.timing);
  if (o.out.empty()) {
    std::cout << json;
  } else {
    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) throw IoError("cannot create " + o.out + ": " + ec.message());
    spit(fs::path(o.out) / (task.id + "." + to_string(t.strategy) + ".json"), json);
  }
  if (t.failure && t.failure->rfind("backend-error", 0) == 0) {
    std::cerr << *t.failure << "\n";
    return kIo;
  }
  return kOk;
}

Thresholds load_thresholds(const std::string& path) {
  if (path.empty()) return {};
  try {
    return parse_thresholds(slurp(path));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int write_report(ReportInputs in, const std::string& out) {
  try {
    in.summaries = aggregate(in.scores, in.thresholds);
  } catch (const AggregationError& e) {
    std::cerr << "cannot aggregate: " << e.what() << "\n";
    return kDomain;
  }
  try {
    emit_report(in, out);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  std::cout << render_table(in.summaries);
  return kOk;
}

int cmd_eval(const std::string& dir, const std::string& out, const fs::path& corpus, const std::string& thresholds) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no transcripts in " + dir);

  std::vector<TranscriptRecord> transcripts;
  for (const auto& f : files) {
    try {
      transcripts.push_back(transcript_from_json(slurp(f.string())));
    } catch (const IoError&) {
      throw;
    } catch (const std::runtime_error& e) {
      throw IoError(f.string() + ": " + e.what());
    }
  }

  std::map<std::string, Task> tasks;
  for (const auto& t : transcripts)
    if (!tasks.count(t.task_id)) tasks.emplace(t.task_id, load_task(t.task_id, corpus));

  // Scoring is independent per transcript; results are reassembled in input order.
  std::vector<std::future<TaskScore>> futures;
  for (const auto& t : transcripts)
    futures.push_back(std::async(std::launch::async, [&tasks, &t] { return score_transcript(tasks.at(t.task_id), t); }));

  auto ids = list_tasks(corpus);
  ReportInputs in;
  in.thresholds = load_thresholds(thresholds);
  std::vector<std::tuple<std::size_t, int, TaskScore, std::string>> rows;
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    auto rank = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), transcripts[i].task_id) - ids.begin());
    rows.emplace_back(rank, static_cast<int>(transcripts[i].strategy), futures[i].get(),
                      scored_content_digest(transcripts[i]));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  for (auto& [rank, s, score, digest] : rows) {
    in.scores.push_back(std::move(score));
    in.generated_from.push_back(std::move(digest));
  }

  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out + ": " + ec.message());
  spit(fs::path(out) / "scores.json", render_scores_json(in.scores, in.generated_from));
  return write_report(std::move(in), out);
}

int cmd_report(const std::string& scores_file, const std::string& out, const std::string& thresholds) {
  ReportInputs in;
  try {
    in = read_scores(slurp(scores_file));
  } catch (const IoError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  in.thresholds = load_thresholds(thresholds);
  return write_report(std::move(in), out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-first planning toolkit: models, plans, strategies, evaluation"};
  app.require_subcommand(1);
  std::string corpus_dir = default_corpus_root().string();
  std::string endpoint;
  app.add_option("--corpus", corpus_dir, "Task corpus root")->capture_default_str();
  app.add_option("--endpoint", endpoint, "Chat-completions URL for the live backend (or MFRKIT_ENDPOINT)");

  std::string file, plan_file, mode = "continue", out, transcripts, scores, thresholds;
  int max_depth = 12;

  auto* parse = app.add_subcommand("parse", "Parse a model and print its canonical form");
  parse->add_option("FILE", file)->required();

  auto* check = app.add_subcommand("check", "List semantic issues of a model");
  check->add_option("FILE", file)->required();

  auto* validate = app.add_subcommand("validate", "Simulate a plan against a model");
  validate->add_option("MODEL", file)->required();
  validate->add_option("PLAN", plan_file)->required();
  validate->add_option("--mode", mode)->check(CLI::IsMember({"halt", "continue"}))->capture_default_str();

  auto* solve_cmd = app.add_subcommand("solve", "Find a shortest plan by breadth-first search");
  solve_cmd->add_option("MODEL", file)->required();
  solve_cmd->add_option("--max-depth", max_depth)->check(CLI::Range(0, 64))->capture_default_str();

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run one strategy on one task");
  run->add_option("--task", run_opts.task)->required();
  run->add_option("--strategy", run_opts.strategy)
      ->required()
      ->check(CLI::IsMember({"cot", "react", "mfr-two-call", "mfr-single-call"}));
  run->add_option("--backend", run_opts.backend)->check(CLI::IsMember({"live", "replay"}))->capture_default_str();
  run->add_option("--fixture", run_opts.fixture, "Replay fixture (JSONL)");
  run->add_option("--model", run_opts.model_name, "Model name sent to the live backend");
  run->add_option("--out", run_opts.out, "Directory for the transcript (stdout if omitted)");
  run->add_flag("--timing", run_opts.timing, "Record latencies in the transcript");

  auto* eval = app.add_subcommand("eval", "Score a directory of transcripts");
  eval->add_option("--transcripts", transcripts)->required();
  eval->add_option("--out", out)->required();
  eval->add_option("--thresholds", thresholds, "key=value band edges");

  auto* report = app.add_subcommand("report", "Aggregate a scores file into report files");
  report->add_option("--scores", scores)->required();
  report->add_option("--out", out)->required();
  report->add_option("--thresholds", thresholds, "key=value band edges");

  auto* tasks = app.add_subcommand("tasks", "List corpus tasks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*parse) return cmd_parse(file);
    if (*check) return cmd_check(file);
    if (*validate) return cmd_validate(file, plan_file, mode);
    if (*solve_cmd) return cmd_solve(file, max_depth);
    if (*run) return cmd_run(run_opts, corpus_dir, endpoint);
    if (*eval) return cmd_eval(transcripts, out, corpus_dir, thresholds);
    if (*report) return cmd_report(scores, out, thresholds);
    if (*tasks) return cmd_tasks(corpus_dir);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnknownTask& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const CorpusError& e) {
    std::cerr << "corpus error: " << e.what() << "\n";
    return kIo;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}
