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

// A deterministic chat-completions server for tests and offline runs.
// It answers POST {prefix}/chat/completions and reports its request count
// at GET /mock/stats.

#ifndef IPR_MOCK_BACKEND_HPP_
#define IPR_MOCK_BACKEND_HPP_

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "httplib.h"
#include "ipr/error.hpp"
#include "ipr/fingerprint.hpp"
#include "ipr/label_schema.hpp"
#include "json.hpp"

namespace ipr {

// Maps the user message content to the assistant reply.
using MockResponder = std::function<std::string(const std::string& content)>;

// Picks a schema label from a hash of the content. About one reply in
// sixteen is an unusable answer so parse failures show up in runs.
inline MockResponder hashed_label_responder(const LabelSchema& schema) {
  return [labels = schema.labels()](const std::string& content) {
    const std::string h = sha256_hex(content);
    const std::uint64_t v = std::stoull(h.substr(0, 15), nullptr, 16);
    if (v % 16 == 0) return std::string("I cannot determine that.");
    return "Answer: " + labels[(v / 16) % labels.size()] + ".";
  };
}

class MockChatServer {
 public:
  explicit MockChatServer(MockResponder responder, std::string required_key = {},
                          std::string prefix = "/v1")
      : responder_(std::move(responder)),
        required_key_(std::move(required_key)),
        prefix_(std::move(prefix)) {
    server_.Post(prefix_ + "/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) { handle(req, res); });
    server_.Get("/mock/stats", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json j{{"requests", request_count()}};
      res.set_content(j.dump(), "application/json");
    });
  }

  ~MockChatServer() { stop(); }

  MockChatServer(const MockChatServer&) = delete;
  MockChatServer& operator=(const MockChatServer&) = delete;

  // Binds (port 0 = any free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0) {
    port_ = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (port_ < 0) throw ConfigError("mock server cannot bind " + host + ":" + std::to_string(port));
    host_ = host;
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  // Blocks serving on the calling thread.
  void serve(const std::string& host, int port) {
    host_ = host;
    port_ = port;
    if (!server_.listen(host, port)) throw ConfigError("mock server cannot listen on " + host);
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string base_url() const {
    return "http://" + host_ + ":" + std::to_string(port_) + prefix_;
  }
  int port() const { return port_; }

  std::size_t request_count() const { return requests_.load(); }

  // The next n chat requests answer HTTP 500.
  void fail_next(std::size_t n) { fail_next_.store(n); }

  // Requests whose content contains `needle` always answer HTTP 500.
  void fail_when_contains(std::string needle) {
    std::lock_guard lock(mu_);
    fail_needles_.push_back(std::move(needle));
  }

  std::vector<std::chrono::steady_clock::time_point> arrival_times() const {
    std::lock_guard lock(mu_);
    return arrivals_;
  }

 private:
  void handle(const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    {
      std::lock_guard lock(mu_);
      arrivals_.push_back(std::chrono::steady_clock::now());
    }
    if (!required_key_.empty() &&
        req.get_header_value("Authorization") != "Bearer " + required_key_) {
      res.status = 401;
      res.set_content(R"({"error":{"message":"invalid api key"}})", "application/json");
      return;
    }
    auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("messages") || !body["messages"].is_array() ||
        body["messages"].empty()) {
      res.status = 400;
      return;
    }
    const std::string content = body["messages"].back().value("content", std::string());

    for (std::size_t left = fail_next_.load(); left > 0; left = fail_next_.load()) {
      if (fail_next_.compare_exchange_weak(left, left - 1)) {
        res.status = 500;
        return;
      }
    }
    {
      std::lock_guard lock(mu_);
      for (const auto& needle : fail_needles_) {
        if (content.find(needle) != std::string::npos) {
          res.status = 500;
          return;
        }
      }
    }

    nlohmann::json reply;
    reply["id"] = "mock-" + sha256_hex(content).substr(0, 12);
    reply["object"] = "chat.completion";
    reply["model"] = body.value("model", std::string("mock"));
    reply["choices"] = nlohmann::json::array(
        {{{"index", 0},
          {"message", {{"role", "assistant"}, {"content", responder_(content)}}},
          {"finish_reason", "stop"}}});
    res.set_content(reply.dump(), "application/json");
  }

  MockResponder responder_;
  std::string required_key_;
  std::string prefix_;
  httplib::Server server_;
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  int port_ = -1;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> fail_next_{0};
  mutable std::mutex mu_;
  std::vector<std::string> fail_needles_;
  std::vector<std::chrono::steady_clock::time_point> arrivals_;
};

}  // namespace ipr

#endif  // IPR_MOCK_BACKEND_HPP_
