/*
 * Copyright 2026 The IPR Toolkit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Runs every (prompt, sample) pair of a corpus against an OpenAI-compatible
// chat-completions endpoint.
//
// Responses are cached in an append-only JSON-lines log keyed by a request
// fingerprint (model, template, sample, temperature); a cell whose
// fingerprint is in the cache is never requested again. Requests are issued
// by a bounded worker pool behind a shared rate limiter. Transient failures
// are retried up to max_retries times; a cell that still fails is marked
// failed and the run continues. Authentication failures abort the run.

#ifndef IPR_RUNNER_HPP_
#define IPR_RUNNER_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "httplib.h"
#include "ipr/annotation_matrix.hpp"
#include "ipr/corpus_io.hpp"
#include "ipr/error.hpp"
#include "ipr/fingerprint.hpp"
#include "ipr/label_schema.hpp"
#include "ipr/text_util.hpp"
#include "json.hpp"

namespace ipr {

struct BackendConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model;
  // Empty disables the Authorization header (local servers).
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  // A non-zero temperature is rejected unless this is set.
  bool temperature_override = false;
  std::size_t max_retries = 3;
  double timeout_seconds = 60.0;
  double rate_limit = 0.0;  // requests per second; 0 = unlimited
  std::size_t workers = 4;
  std::optional<int> max_tokens;
  std::string system_prompt;  // empty: single user message
  std::chrono::milliseconds retry_backoff{500};

  void validate() const {
    if (model.empty()) throw ConfigError("backend model is not set");
    if (base_url.empty()) throw ConfigError("backend URL is not set");
    if (temperature != 0.0 && !temperature_override) {
      throw ConfigError("non-zero temperature requires an explicit override");
    }
    if (temperature < 0.0) throw ConfigError("temperature must be non-negative");
    if (workers == 0) throw ConfigError("worker count must be positive");
    if (rate_limit < 0.0) throw ConfigError("rate limit must be non-negative");
    if (!(timeout_seconds > 0.0)) throw ConfigError("timeout must be positive");
  }

  std::string resolve_api_key() const {
    if (api_key_env.empty()) return {};
    const char* v = std::getenv(api_key_env.c_str());
    if (v == nullptr || *v == '\0') {
      throw ConfigError("credential environment variable " + api_key_env + " is not set");
    }
    return v;
  }
};

inline std::string render_prompt_text(const PromptSpec& prompt, std::string_view sample) {
  validate_template(prompt);
  std::string out = prompt.template_text;
  out.replace(out.find(kSamplePlaceholder), kSamplePlaceholder.size(), sample);
  return out;
}

inline nlohmann::json render_request(const PromptSpec& prompt, std::string_view sample,
                                     const BackendConfig& cfg) {
  nlohmann::json messages = nlohmann::json::array();
  if (!cfg.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", cfg.system_prompt}});
  }
  messages.push_back({{"role", "user"}, {"content", render_prompt_text(prompt, sample)}});
  nlohmann::json payload;
  payload["model"] = cfg.model;
  payload["messages"] = std::move(messages);
  payload["temperature"] = cfg.temperature;
  if (cfg.max_tokens) payload["max_tokens"] = *cfg.max_tokens;
  return payload;
}

inline std::string request_fingerprint(std::string_view model, std::string_view template_text,
                                       std::string_view sample, double temperature) {
  const std::string t = format_double(temperature);
  return fingerprint_fields({model, template_text, sample, t});
}

struct ChatResult {
  enum class Kind { kOk, kAuthFailure, kTransientFailure };
  Kind kind = Kind::kTransientFailure;
  std::string text;
  std::string error;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResult complete(const nlohmann::json& payload) = 0;
};

// Extracts choices[0].message.content from a chat-completions response body.
inline std::optional<std::string> extract_chat_content(std::string_view body) {
  auto j = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return std::nullopt;
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

class HttpChatBackend : public ChatBackend {
 public:
  HttpChatBackend(const std::string& base_url, std::string api_key, double timeout_seconds)
      : api_key_(std::move(api_key)), timeout_seconds_(timeout_seconds) {
    const auto scheme = base_url.find("://");
    if (scheme == std::string::npos) throw ConfigError("backend URL needs a scheme: " + base_url);
    const auto path = base_url.find('/', scheme + 3);
    origin_ = base_url.substr(0, path);
    std::string prefix = path == std::string::npos ? std::string() : base_url.substr(path);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    endpoint_ = prefix + "/chat/completions";
  }

  ChatResult complete(const nlohmann::json& payload) override {
    httplib::Client client(origin_);
    const auto secs = static_cast<time_t>(timeout_seconds_);
    const auto usecs = static_cast<time_t>((timeout_seconds_ - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = client.Post(endpoint_, headers, payload.dump(), "application/json");
    if (!res) return {ChatResult::Kind::kTransientFailure, {}, httplib::to_string(res.error())};
    if (res->status == 401 || res->status == 403) {
      return {ChatResult::Kind::kAuthFailure, {}, "HTTP " + std::to_string(res->status)};
    }
    if (res->status != 200) {
      return {ChatResult::Kind::kTransientFailure, {}, "HTTP " + std::to_string(res->status)};
    }
    auto content = extract_chat_content(res->body);
    if (!content) return {ChatResult::Kind::kTransientFailure, {}, "malformed response body"};
    return {ChatResult::Kind::kOk, std::move(*content), {}};
  }

 private:
  std::string origin_;
  std::string endpoint_;
  std::string api_key_;
  double timeout_seconds_;
};

struct AnnotationRecord {
  std::string prompt_id;
  std::string sample_id;
  std::string model;
  std::string raw_response;
  ParsedLabel parsed;
  std::string fingerprint;
  std::string timestamp;

  nlohmann::json to_json(const LabelSchema& schema) const {
    nlohmann::json p;
    p["outcome"] = std::string(to_string(parsed.outcome));
    if (parsed.is_valid()) p["label"] = schema.labels().at(parsed.index);
    if (parsed.outcome == ParsedLabel::Outcome::kExtra) p["label"] = parsed.extra_name;
    p["matched"] = parsed.matched_text;
    return {{"prompt_id", prompt_id}, {"sample_id", sample_id},  {"model", model},
            {"raw_response", raw_response}, {"parsed", p}, {"fingerprint", fingerprint},
            {"timestamp", timestamp}};
  }
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Append-only response log. Only successful responses are stored; the
// parsed label is always recomputed from raw_response on reuse.
class ResponseCache {
 public:
  explicit ResponseCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("fingerprint") ||
          !j.contains("raw_response")) {
        ++skipped_lines_;  // e.g. a line cut short by a crash
        continue;
      }
      entries_[j["fingerprint"].get<std::string>()] = j["raw_response"].get<std::string>();
    }
  }

  std::optional<std::string> find(const std::string& fingerprint) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(fingerprint);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void append(const AnnotationRecord& rec, const LabelSchema& schema) {
    const std::string line = rec.to_json(schema).dump() + "\n";
    std::lock_guard lock(mu_);
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw ConfigError("cannot append to cache '" + path_ + "'");
    out << line;
    out.flush();
    entries_[rec.fingerprint] = rec.raw_response;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }
  std::size_t skipped_lines() const { return skipped_lines_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
  std::size_t skipped_lines_ = 0;
};

// Spaces request start times at least 1/rate apart across all workers.
class RateLimiter {
 public:
  explicit RateLimiter(double rate) {
    if (rate > 0.0) {
      interval_ = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / rate));
    }
  }

  void acquire() {
    if (interval_ == Clock::duration::zero()) return;
    Clock::time_point slot;
    {
      std::lock_guard lock(mu_);
      slot = std::max(Clock::now(), next_);
      next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  using Clock = std::chrono::steady_clock;
  std::mutex mu_;
  Clock::duration interval_{0};
  Clock::time_point next_{};
};

struct RunStats {
  std::size_t cells = 0;
  std::size_t cache_hits = 0;
  std::size_t requests = 0;  // HTTP attempts, including retries
  std::size_t failed_cells = 0;
};

struct RunResult {
  AnnotationMatrix matrix;
  RunStats stats;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

inline RunResult annotate_all(const std::vector<PromptSpec>& corpus, const Dataset& dataset,
                              const LabelSchema& schema, ChatBackend& backend,
                              const BackendConfig& cfg, ResponseCache& cache,
                              const ProgressFn& progress = {}) {
  cfg.validate();
  if (corpus.empty()) throw Error("annotate_all: empty prompt corpus");
  if (dataset.samples.empty()) throw Error("annotate_all: empty dataset");
  for (const auto& p : corpus) validate_template(p);

  std::vector<PromptInfo> prompts;
  for (const auto& p : corpus) prompts.push_back({p.id, std::string(to_string(p.style))});
  std::vector<std::string> sample_ids;
  for (const auto& s : dataset.samples) sample_ids.push_back(s.sample_id);
  AnnotationMatrix m(schema, std::move(prompts), std::move(sample_ids), dataset.gold());
  m.dataset_name = schema.name();
  m.model = cfg.model;

  const std::size_t n = dataset.samples.size();
  const std::size_t total = corpus.size() * n;
  RunStats stats;
  stats.cells = total;

  // Cache pass first, so a warm rerun never touches the network.
  std::vector<std::size_t> pending;
  for (std::size_t p = 0; p < corpus.size(); ++p) {
    for (std::size_t s = 0; s < n; ++s) {
      const auto fp = request_fingerprint(cfg.model, corpus[p].template_text,
                                          dataset.samples[s].text, cfg.temperature);
      if (auto raw = cache.find(fp)) {
        m.set_cell(p, s, Cell{schema.normalize(*raw), CellStatus::kOk, *raw, fp});
        ++stats.cache_hits;
      } else {
        pending.push_back(p * n + s);
      }
    }
  }
  if (progress) progress(stats.cache_hits, total);

  RateLimiter limiter(cfg.rate_limit);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> requests{0};
  std::atomic<std::size_t> done{stats.cache_hits};
  std::atomic<bool> auth_failed{false};
  std::mutex result_mu;
  std::mutex progress_mu;
  std::string auth_error;

  auto worker = [&] {
    for (;;) {
      if (auth_failed.load()) return;
      const std::size_t t = next.fetch_add(1);
      if (t >= pending.size()) return;
      const std::size_t p = pending[t] / n;
      const std::size_t s = pending[t] % n;
      const auto& prompt = corpus[p];
      const auto& sample = dataset.samples[s];
      const auto payload = render_request(prompt, sample.text, cfg);
      const auto fp =
          request_fingerprint(cfg.model, prompt.template_text, sample.text, cfg.temperature);

      ChatResult result;
      for (std::size_t attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0 && cfg.retry_backoff.count() > 0) {
          const auto shift = std::min<std::size_t>(attempt - 1, 6);
          std::this_thread::sleep_for(cfg.retry_backoff * (std::size_t{1} << shift));
        }
        limiter.acquire();
        ++requests;
        result = backend.complete(payload);
        if (result.kind != ChatResult::Kind::kTransientFailure) break;
      }

      Cell cell;
      cell.fingerprint = fp;
      if (result.kind == ChatResult::Kind::kAuthFailure) {
        std::lock_guard lock(result_mu);
        if (!auth_failed.exchange(true)) auth_error = result.error;
        return;
      }
      if (result.kind == ChatResult::Kind::kOk) {
        cell.raw = result.text;
        cell.parsed = schema.normalize(result.text);
        cache.append({prompt.id, sample.sample_id, cfg.model, result.text, cell.parsed, fp,
                      utc_timestamp()},
                     schema);
      } else {
        cell.status = CellStatus::kFailed;
      }
      {
        std::lock_guard lock(result_mu);
        m.set_cell(p, s, std::move(cell));
      }
      const auto d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mu);
        progress(d, total);
      }
    }
  };

  const std::size_t nworkers = std::min(cfg.workers, std::max<std::size_t>(pending.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < nworkers && !pending.empty(); ++w) pool.emplace_back(worker);
  }
  if (auth_failed.load()) throw AuthError("backend rejected credentials: " + auth_error);

  stats.requests = requests.load();
  stats.failed_cells = m.count_failed();
  return {std::move(m), stats};
}

}  // namespace ipr

#endif  // IPR_RUNNER_HPP_
