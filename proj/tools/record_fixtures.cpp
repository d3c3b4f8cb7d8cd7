// Builds a replay fixture from scripted responses.
//
//   mfrkit_record SCRIPTS_DIR OUT.jsonl [--corpus DIR]
//
// SCRIPTS_DIR holds TASK.STRATEGY.txt files whose responses are separated by
// lines consisting of `%%`. Each script is played through the real strategy
// runner so that every recorded key is the digest of the prompt the runner
// actually sends.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "mfr/corpus.hpp"
#include "mfr/pipeline.hpp"

namespace fs = std::filesystem;
using namespace mfr;

namespace {

std::vector<std::string> split_script(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line == "%%") {
      out.push_back(current);
      current.clear();
    } else {
      current += line + "\n";
    }
  }
  out.push_back(current);
  return out;
}

class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<std::string> responses) : responses_(std::move(responses)) {}
  Completion complete(const std::string& prompt) override {
    if (next_ >= responses_.size()) throw BackendError(0, "script exhausted");
    recorded.emplace_back(prompt_key(prompt), responses_[next_]);
    return {responses_[next_++], 0, std::nullopt, std::nullopt};
  }
  std::string descriptor() const override { return "scripted"; }
  std::vector<std::pair<std::string, std::string>> recorded;
  std::size_t unused() const { return responses_.size() - next_; }

 private:
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Record a replay fixture from scripted responses"};
  std::string scripts, out, corpus = default_corpus_root().string();
  app.add_option("SCRIPTS_DIR", scripts)->required();
  app.add_option("OUT", out)->required();
  app.add_option("--corpus", corpus);
  CLI11_PARSE(app, argc, argv);

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(scripts))
    if (e.path().extension() == ".txt") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::map<std::string, std::string> table;
  int rc = 0;
  for (const auto& f : files) {
    std::string stem = f.stem().string();
    auto dot = stem.find('.');
    auto strategy = dot == std::string::npos ? std::nullopt : strategy_from_string(stem.substr(dot + 1));
    if (!strategy) {
      std::cerr << f << ": expected TASK.STRATEGY.txt\n";
      return 2;
    }
    Task task = load_task(stem.substr(0, dot), corpus);
    ScriptedBackend backend(split_script(read_file(f)));
    TranscriptRecord t = run_strategy({task.id, task.nl_description, &task.reference_model}, *strategy, backend);
    if (t.failure) {
      std::cerr << stem << ": " << *t.failure << "\n";
      rc = 1;
    }
    if (backend.unused() != 0) {
      std::cerr << stem << ": " << backend.unused() << " scripted response(s) unused\n";
      rc = 1;
    }
    for (auto& [key, response] : backend.recorded) {
      auto [it, fresh] = table.emplace(key, response);
      if (!fresh && it->second != response) {
        std::cerr << stem << ": conflicting responses for one prompt\n";
        rc = 1;
      }
    }
  }

  std::ofstream os(out, std::ios::binary | std::ios::trunc);
  for (const auto& [key, response] : table) os << nlohmann::ordered_json{{"key", key}, {"response", response}}.dump() << "\n";
  if (!os) {
    std::cerr << "cannot write " << out << "\n";
    return 3;
  }
  std::cerr << table.size() << " fixture records written\n";
  return rc;
}
