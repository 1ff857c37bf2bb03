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

// Serves deterministic chat completions for offline runs of `ipr annotate`.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ipr/error.hpp"
#include "ipr/label_schema.hpp"
#include "ipr/mock_backend.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Deterministic OpenAI-compatible mock server", "ipr-mock-server"};
  std::string host = "127.0.0.1";
  int port = 8089;
  std::string schema = "trec6";
  std::string api_key_env;
  app.add_option("--host", host)->capture_default_str();
  app.add_option("--port", port)->capture_default_str();
  app.add_option("--schema", schema, "Labels to answer with (built-in name or file)")
      ->capture_default_str();
  app.add_option("--api-key-env", api_key_env,
                 "Require 'Bearer $VAR' when set (default: no auth)");
  CLI11_PARSE(app, argc, argv);

  try {
    std::string key;
    if (!api_key_env.empty()) {
      const char* v = std::getenv(api_key_env.c_str());
      if (v == nullptr || *v == '\0') {
        std::cerr << "error: credential environment variable " << api_key_env << " is not set\n";
        return 2;
      }
      key = v;
    }
    ipr::MockChatServer server(ipr::hashed_label_responder(ipr::load_schema(schema)), key);
    std::cerr << "serving on http://" << host << ":" << port << "/v1\n";
    server.serve(host, port);
  } catch (const ipr::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
