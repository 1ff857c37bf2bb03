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

#ifndef IPR_ERROR_HPP_
#define IPR_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ipr {

// Domain error: bad data, violated preconditions, malformed files.
// The CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration or credential problem. CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The backend rejected our credentials; aborts an annotation run.
class AuthError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace ipr

#endif  // IPR_ERROR_HPP_
