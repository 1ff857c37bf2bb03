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

// Label sets and the mapping from free-form model output to schema labels.
//
// A schema is either categorical (unordered classes) or ordinal (classes with
// strictly increasing scores). Responses are matched token-wise: both the
// response and every label are reduced to a sequence of lower-cased
// alphanumeric tokens, and a label matches when its token sequence occurs
// contiguously in the response. Longer labels claim their tokens first, so
// "MOSTLY TRUE" never also reports "TRUE". A response is valid only when
// exactly one distinct label survives.

#ifndef IPR_LABEL_SCHEMA_HPP_
#define IPR_LABEL_SCHEMA_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ipr/error.hpp"
#include "json.hpp"

namespace ipr {

enum class SchemaKind { kCategorical, kOrdinal };

inline std::string_view to_string(SchemaKind kind) {
  return kind == SchemaKind::kOrdinal ? "ordinal" : "categorical";
}

inline SchemaKind parse_schema_kind(std::string_view s) {
  if (s == "categorical") return SchemaKind::kCategorical;
  if (s == "ordinal") return SchemaKind::kOrdinal;
  throw Error("unknown schema kind '" + std::string(s) + "'");
}

// A parsed label index, or nullopt for anything that is not a schema label
// (extra labels, unparseable output, failed requests).
using Label = std::optional<std::size_t>;

struct ParsedLabel {
  enum class Outcome { kValid, kExtra, kInvalid };

  Outcome outcome = Outcome::kInvalid;
  std::size_t index = 0;     // meaningful for kValid only
  std::string extra_name;    // meaningful for kExtra only
  std::string matched_text;  // empty when kInvalid

  static ParsedLabel valid(std::size_t index, std::string matched) {
    return {Outcome::kValid, index, {}, std::move(matched)};
  }
  static ParsedLabel extra(std::string name, std::string matched) {
    return {Outcome::kExtra, 0, std::move(name), std::move(matched)};
  }
  static ParsedLabel invalid() { return {}; }

  bool is_valid() const { return outcome == Outcome::kValid; }
  Label label() const { return is_valid() ? Label(index) : std::nullopt; }

  friend bool operator==(const ParsedLabel&, const ParsedLabel&) = default;
};

inline std::string_view to_string(ParsedLabel::Outcome o) {
  switch (o) {
    case ParsedLabel::Outcome::kValid:
      return "valid";
    case ParsedLabel::Outcome::kExtra:
      return "extra";
    case ParsedLabel::Outcome::kInvalid:
      return "invalid";
  }
  return "invalid";
}

inline ParsedLabel::Outcome parse_outcome(std::string_view s) {
  if (s == "valid") return ParsedLabel::Outcome::kValid;
  if (s == "extra") return ParsedLabel::Outcome::kExtra;
  if (s == "invalid") return ParsedLabel::Outcome::kInvalid;
  throw Error("unknown label outcome '" + std::string(s) + "'");
}

namespace detail {

inline bool is_token_byte(unsigned char c) {
  // Non-ASCII bytes are kept inside tokens so UTF-8 words stay whole.
  return std::isalnum(c) != 0 || c >= 0x80;
}

struct Token {
  std::string text;  // lower-cased
  std::size_t begin;
  std::size_t end;
};

inline std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !is_token_byte(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    std::size_t b = i;
    std::string t;
    while (i < s.size() && is_token_byte(static_cast<unsigned char>(s[i]))) {
      t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
      ++i;
    }
    out.push_back({std::move(t), b, i});
  }
  return out;
}

}  // namespace detail

// Canonical form: case-folded tokens joined by single spaces. Two labels are
// the same label iff their canonical forms are equal.
inline std::string canonicalize(std::string_view s) {
  std::string out;
  for (const auto& t : detail::tokenize(s)) {
    if (!out.empty()) out.push_back(' ');
    out += t.text;
  }
  return out;
}

class LabelSchema {
 public:
  LabelSchema() = default;

  const std::string& name() const { return name_; }
  SchemaKind kind() const { return kind_; }
  bool is_ordinal() const { return kind_ == SchemaKind::kOrdinal; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<double>& scores() const { return scores_; }
  const std::vector<std::string>& extra_labels() const { return extra_; }
  std::size_t size() const { return labels_.size(); }

  // Max score distance D. Only defined for ordinal schemas.
  double max_distance() const {
    require_ordinal();
    return scores_.back() - scores_.front();
  }
  double min_score() const {
    require_ordinal();
    return scores_.front();
  }
  double max_score() const {
    require_ordinal();
    return scores_.back();
  }

  double score(std::size_t label) const {
    require_ordinal();
    if (label >= labels_.size()) {
      throw Error("label index " + std::to_string(label) + " out of range for schema '" +
                  name_ + "'");
    }
    return scores_[label];
  }

  // Nearest schema label to a score; ties go to the lower label.
  std::size_t nearest_label(double score) const {
    require_ordinal();
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores_.size(); ++i) {
      if (std::abs(scores_[i] - score) < std::abs(scores_[best] - score)) best = i;
    }
    return best;
  }

  // Exact (canonical) lookup of a schema label name.
  std::optional<std::size_t> find(std::string_view text) const {
    const std::string c = canonicalize(text);
    for (std::size_t i = 0; i < canonical_.size(); ++i) {
      if (canonical_[i] == c) return i;
    }
    return std::nullopt;
  }

  bool is_extra(std::string_view text) const {
    const std::string c = canonicalize(text);
    return std::find(extra_canonical_.begin(), extra_canonical_.end(), c) !=
           extra_canonical_.end();
  }

  ParsedLabel normalize(std::string_view raw) const;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["name"] = name_;
    j["kind"] = std::string(to_string(kind_));
    j["labels"] = labels_;
    if (is_ordinal()) j["scores"] = scores_;
    if (!extra_.empty()) j["extra"] = extra_;
    return j;
  }

  friend bool operator==(const LabelSchema& a, const LabelSchema& b) {
    return a.name_ == b.name_ && a.kind_ == b.kind_ && a.labels_ == b.labels_ &&
           a.scores_ == b.scores_ && a.extra_ == b.extra_;
  }

 private:
  friend LabelSchema build_schema(std::string, std::vector<std::string>, SchemaKind,
                                  std::optional<std::vector<double>>,
                                  std::vector<std::string>);

  void require_ordinal() const {
    if (!is_ordinal()) throw Error("schema '" + name_ + "' is categorical; it has no scores");
  }

  std::string name_;
  SchemaKind kind_ = SchemaKind::kCategorical;
  std::vector<std::string> labels_;
  std::vector<double> scores_;
  std::vector<std::string> extra_;
  std::vector<std::string> canonical_;
  std::vector<std::string> extra_canonical_;
  std::vector<std::vector<std::string>> label_tokens_;  // schema labels, then extras
};

inline LabelSchema build_schema(std::string name, std::vector<std::string> labels, SchemaKind kind,
                                std::optional<std::vector<double>> scores = std::nullopt,
                                std::vector<std::string> extra = {}) {
  if (labels.empty()) throw Error("schema '" + name + "' has no labels");
  LabelSchema s;
  s.name_ = std::move(name);
  s.kind_ = kind;

  std::vector<std::string> seen;
  auto add_canonical = [&](const std::string& label) {
    std::string c = canonicalize(label);
    if (c.empty()) throw Error("label '" + label + "' is empty after normalization");
    if (std::find(seen.begin(), seen.end(), c) != seen.end()) {
      throw Error("duplicate label '" + label + "' after normalization in schema '" + s.name_ +
                  "'");
    }
    seen.push_back(c);
    return c;
  };
  for (const auto& l : labels) s.canonical_.push_back(add_canonical(l));
  for (const auto& l : extra) s.extra_canonical_.push_back(add_canonical(l));

  if (kind == SchemaKind::kOrdinal) {
    if (!scores) throw Error("ordinal schema '" + s.name_ + "' requires scores");
    if (scores->size() != labels.size()) {
      throw Error("ordinal schema '" + s.name_ + "' has " + std::to_string(labels.size()) +
                  " labels but " + std::to_string(scores->size()) + " scores");
    }
    for (std::size_t i = 0; i < scores->size(); ++i) {
      if (!std::isfinite((*scores)[i])) throw Error("non-finite ordinal score");
      if (i > 0 && !((*scores)[i] > (*scores)[i - 1])) {
        throw Error("ordinal scores of schema '" + s.name_ + "' are not strictly increasing");
      }
    }
    if (!(scores->back() - scores->front() > 0)) {
      throw Error("ordinal schema '" + s.name_ + "' has zero score range");
    }
    s.scores_ = std::move(*scores);
  } else if (scores && !scores->empty()) {
    throw Error("categorical schema '" + s.name_ + "' must not carry scores");
  }

  s.labels_ = std::move(labels);
  s.extra_ = std::move(extra);
  for (const auto& c : s.canonical_) {
    std::vector<std::string> toks;
    for (auto& t : detail::tokenize(c)) toks.push_back(std::move(t.text));
    s.label_tokens_.push_back(std::move(toks));
  }
  for (const auto& c : s.extra_canonical_) {
    std::vector<std::string> toks;
    for (auto& t : detail::tokenize(c)) toks.push_back(std::move(t.text));
    s.label_tokens_.push_back(std::move(toks));
  }
  return s;
}

inline ParsedLabel LabelSchema::normalize(std::string_view raw) const {
  const auto tokens = detail::tokenize(raw);

  struct Hit {
    std::size_t candidate;  // index into label_tokens_
    std::size_t first;      // token range [first, last)
    std::size_t last;
  };
  std::vector<Hit> hits;
  for (std::size_t c = 0; c < label_tokens_.size(); ++c) {
    const auto& lt = label_tokens_[c];
    if (lt.size() > tokens.size()) continue;
    for (std::size_t i = 0; i + lt.size() <= tokens.size(); ++i) {
      bool match = true;
      for (std::size_t k = 0; k < lt.size() && match; ++k) match = tokens[i + k].text == lt[k];
      if (match) hits.push_back({c, i, i + lt.size()});
    }
  }

  // Longest label first; within a length, earlier position first.
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    const std::size_t la = a.last - a.first;
    const std::size_t lb = b.last - b.first;
    if (la != lb) return la > lb;
    return a.first < b.first;
  });
  std::vector<bool> claimed(tokens.size(), false);
  std::vector<Hit> accepted;
  for (const auto& h : hits) {
    bool free = true;
    for (std::size_t i = h.first; i < h.last && free; ++i) free = !claimed[i];
    if (!free) continue;
    for (std::size_t i = h.first; i < h.last; ++i) claimed[i] = true;
    accepted.push_back(h);
  }
  if (accepted.empty()) return ParsedLabel::invalid();
  for (const auto& h : accepted) {
    if (h.candidate != accepted.front().candidate) return ParsedLabel::invalid();
  }

  const Hit& h = *std::min_element(accepted.begin(), accepted.end(),
                                   [](const Hit& a, const Hit& b) { return a.first < b.first; });
  std::string matched(raw.substr(tokens[h.first].begin,
                                 tokens[h.last - 1].end - tokens[h.first].begin));
  if (h.candidate < labels_.size()) return ParsedLabel::valid(h.candidate, std::move(matched));
  return ParsedLabel::extra(extra_[h.candidate - labels_.size()], std::move(matched));
}

inline ParsedLabel normalize_response(std::string_view raw, const LabelSchema& schema) {
  return schema.normalize(raw);
}

inline double label_to_score(std::size_t label, const LabelSchema& schema) {
  return schema.score(label);
}

inline LabelSchema schema_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("schema must be a JSON object");
  try {
    std::optional<std::vector<double>> scores;
    if (j.contains("scores")) scores = j.at("scores").get<std::vector<double>>();
    std::vector<std::string> extra;
    if (j.contains("extra")) extra = j.at("extra").get<std::vector<std::string>>();
    return build_schema(j.at("name").get<std::string>(),
                        j.at("labels").get<std::vector<std::string>>(),
                        parse_schema_kind(j.at("kind").get<std::string>()), std::move(scores),
                        std::move(extra));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed schema: ") + e.what());
  }
}

inline LabelSchema trec6_schema() {
  return build_schema("trec6",
                      {"Number", "Location", "Person", "Description", "Entity", "Abbreviation"},
                      SchemaKind::kCategorical);
}

// Lowest score = most false; integer scores give D = 5.
inline LabelSchema politifact6_schema() {
  return build_schema("politifact6",
                      {"PANTS ON FIRE", "FALSE", "MOSTLY FALSE", "HALF TRUE", "MOSTLY TRUE", "TRUE"},
                      SchemaKind::kOrdinal, std::vector<double>{0, 1, 2, 3, 4, 5},
                      {"NO VERDICT"});
}

inline std::optional<LabelSchema> builtin_schema(std::string_view name) {
  if (name == "trec6") return trec6_schema();
  if (name == "politifact6") return politifact6_schema();
  return std::nullopt;
}

// Accepts a built-in name or a path to a schema JSON file.
inline LabelSchema load_schema(const std::string& name_or_path) {
  if (auto s = builtin_schema(name_or_path)) return *s;
  std::ifstream in(name_or_path);
  if (!in) throw ConfigError("cannot open schema '" + name_or_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("schema file '" + name_or_path + "' is not valid JSON: " + e.what());
  }
  return schema_from_json(j);
}

}  // namespace ipr

#endif  // IPR_LABEL_SCHEMA_HPP_
