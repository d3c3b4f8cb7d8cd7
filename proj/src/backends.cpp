#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "mfr/pipeline.hpp"

namespace mfr {

using nlohmann::json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string prompt_key(std::string_view prompt) {
  std::string canon;
  canon.reserve(prompt.size());
  std::size_t start = 0;
  while (start <= prompt.size()) {
    std::size_t nl = prompt.find('\n', start);
    std::string_view line = prompt.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.remove_suffix(1);
    canon.append(line);
    if (nl == std::string_view::npos) break;
    canon += '\n';
    start = nl + 1;
  }
  while (!canon.empty() && canon.back() == '\n') canon.pop_back();
  return sha256_hex(canon);
}

void validate_config(const BackendConfig& c) {
  if (c.kind == BackendConfig::Kind::Live) {
    if (c.endpoint.empty()) throw std::invalid_argument("live backend needs an endpoint");
    if (c.model_name.empty()) throw std::invalid_argument("live backend needs a model name");
  } else if (c.fixture_path.empty()) {
    throw std::invalid_argument("replay backend needs a fixture path");
  }
  if (c.retries < 0) throw std::invalid_argument("retries must be nonnegative");
}

// ---------------------------------------------------------------------------

ReplayBackend::ReplayBackend(const std::string& fixture_path)
    : name_(std::filesystem::path(fixture_path).filename().string()) {
  std::ifstream in(fixture_path);
  if (!in) throw BackendError(0, "cannot open replay fixture " + fixture_path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json rec = json::parse(line);
      table_[rec.at("key").get<std::string>()] = rec.at("response").get<std::string>();
    } catch (const json::exception& e) {
      throw BackendError(0, fixture_path + ":" + std::to_string(line_no) + ": bad fixture record: " + e.what());
    }
  }
}

ReplayBackend::ReplayBackend(std::unordered_map<std::string, std::string> table, std::string name)
    : table_(std::move(table)), name_(std::move(name)) {}

Completion ReplayBackend::complete(const std::string& prompt) {
  auto t0 = std::chrono::steady_clock::now();
  std::string key = prompt_key(prompt);
  auto it = table_.find(key);
  if (it == table_.end()) throw MissingFixture(key);
  Completion c;
  c.text = it->second;
  c.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

// ---------------------------------------------------------------------------

LiveBackend::LiveBackend(BackendConfig config) : config_(std::move(config)) {
  validate_config(config_);
  const std::string& url = config_.endpoint;
  auto scheme = url.find("://");
  auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  base_ = url.substr(0, slash);
  path_ = slash == std::string::npos ? "/v1/chat/completions" : url.substr(slash);
}

std::string LiveBackend::descriptor() const { return "live:" + config_.model_name + "@" + config_.endpoint; }

Completion LiveBackend::complete(const std::string& prompt) {
  json body = {{"model", config_.model_name},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
               {"temperature", config_.temperature},
               {"max_tokens", config_.max_output_tokens}};
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto t0 = std::chrono::steady_clock::now();
  auto delay = config_.backoff;
  std::string last_error;
  int last_status = 0;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Client client(base_);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
      last_status = 0;
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_status = res->status;
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw BackendError(res->status, "HTTP " + std::to_string(res->status) + ": " + res->body);
    Completion c;
    try {
      json reply = json::parse(res->body);
      c.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      if (reply.contains("usage")) {
        const auto& u = reply["usage"];
        if (u.contains("prompt_tokens")) c.prompt_tokens = u["prompt_tokens"].get<int>();
        if (u.contains("completion_tokens")) c.completion_tokens = u["completion_tokens"].get<int>();
      }
    } catch (const json::exception& e) {
      throw BackendError(res->status, std::string("malformed completion response: ") + e.what());
    }
    c.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return c;
  }
  throw BackendError(last_status, last_error + " after " + std::to_string(config_.retries + 1) + " attempt(s)");
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  validate_config(config);
  if (config.kind == BackendConfig::Kind::Live) return std::make_unique<LiveBackend>(config);
  return std::make_unique<ReplayBackend>(config.fixture_path);
}

Completion complete(const BackendConfig& config, const std::string& prompt) {
  return make_backend(config)->complete(prompt);
}

}  // namespace mfr
