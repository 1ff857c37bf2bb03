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

#ifndef IPR_FINGERPRINT_HPP_
#define IPR_FINGERPRINT_HPP_

#include <openssl/evp.h>

#include <initializer_list>
#include <string>
#include <string_view>

#include "ipr/error.hpp"

namespace ipr {

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

// Hash of a field list; each field is length-prefixed so boundaries are
// unambiguous.
inline std::string fingerprint_fields(std::initializer_list<std::string_view> fields) {
  std::string buf;
  for (auto f : fields) {
    buf += std::to_string(f.size());
    buf.push_back(':');
    buf.append(f);
  }
  return sha256_hex(buf);
}

}  // namespace ipr

#endif  // IPR_FINGERPRINT_HPP_
