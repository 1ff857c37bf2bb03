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

// File formats.
//
//   corpus   JSON lines  {"id", "style", "dataset", "template"}
//   dataset  JSON lines  {"sample_id", "text", "gold"}
//   matrix   JSON lines  header record, one record per cell, end record
//
// Templates carry exactly one "{{sample}}" placeholder.

#ifndef IPR_CORPUS_IO_HPP_
#define IPR_CORPUS_IO_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ipr/annotation_matrix.hpp"
#include "ipr/error.hpp"
#include "ipr/label_schema.hpp"
#include "ipr/text_util.hpp"
#include "json.hpp"

namespace ipr {

inline constexpr std::string_view kSamplePlaceholder = "{{sample}}";
inline constexpr int kMatrixFormatVersion = 1;

enum class PromptStyle { kAnalytical, kContextual, kStandard };

inline std::string_view to_string(PromptStyle s) {
  switch (s) {
    case PromptStyle::kAnalytical:
      return "analytical";
    case PromptStyle::kContextual:
      return "contextual";
    case PromptStyle::kStandard:
      return "standard";
  }
  return "standard";
}

inline PromptStyle parse_prompt_style(std::string_view s) {
  if (s == "analytical") return PromptStyle::kAnalytical;
  if (s == "contextual") return PromptStyle::kContextual;
  if (s == "standard") return PromptStyle::kStandard;
  throw Error("unknown prompt style '" + std::string(s) + "'");
}

struct PromptSpec {
  std::string id;
  PromptStyle style = PromptStyle::kStandard;
  std::string dataset;
  std::string template_text;

  friend bool operator==(const PromptSpec&, const PromptSpec&) = default;
};

inline std::size_t count_placeholders(std::string_view text) {
  std::size_t n = 0;
  for (auto pos = text.find(kSamplePlaceholder); pos != std::string_view::npos;
       pos = text.find(kSamplePlaceholder, pos + kSamplePlaceholder.size())) {
    ++n;
  }
  return n;
}

inline void validate_template(const PromptSpec& p) {
  const auto n = count_placeholders(p.template_text);
  if (n == 0) throw Error("prompt '" + p.id + "' has no " + std::string(kSamplePlaceholder) + " placeholder");
  if (n > 1) throw Error("prompt '" + p.id + "' has " + std::to_string(n) + " sample placeholders");
}

struct Corpus {
  std::vector<PromptSpec> prompts;  // file order
  std::vector<std::string> warnings;

  std::map<std::string, std::size_t> count_by_style() const {
    std::map<std::string, std::size_t> out;
    for (const auto& p : prompts) ++out[std::string(to_string(p.style))];
    return out;
  }

  std::vector<PromptSpec> for_dataset(std::string_view dataset) const {
    std::vector<PromptSpec> out;
    for (const auto& p : prompts) {
      if (p.dataset == dataset) out.push_back(p);
    }
    return out;
  }
};

namespace detail {

template <typename Fn>
void for_each_jsonl(const std::string& text, const std::string& what, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(what + " line " + std::to_string(lineno) + ": invalid JSON: " + e.what());
    }
    try {
      fn(j, lineno);
    } catch (const nlohmann::json::exception& e) {
      throw Error(what + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace detail

inline Corpus parse_corpus(const std::string& text) {
  Corpus c;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  detail::for_each_jsonl(text, "corpus", [&](const nlohmann::json& j, std::size_t lineno) {
    PromptSpec p;
    p.id = j.at("id").get<std::string>();
    p.style = parse_prompt_style(j.at("style").get<std::string>());
    p.dataset = j.at("dataset").get<std::string>();
    p.template_text = j.at("template").get<std::string>();
    validate_template(p);
    if (!seen.emplace(std::make_pair(p.id, p.dataset), lineno).second) {
      throw Error("corpus line " + std::to_string(lineno) + ": duplicate prompt id '" + p.id +
                  "' for dataset '" + p.dataset + "'");
    }
    c.prompts.push_back(std::move(p));
  });
  if (c.prompts.empty()) throw Error("corpus has no prompts");
  std::map<std::string, std::size_t> per_dataset;
  for (const auto& p : c.prompts) ++per_dataset[p.dataset];
  for (const auto& [ds, n] : per_dataset) {
    if (n == 1) {
      c.warnings.push_back("dataset '" + ds +
                           "' has a single prompt: mean and sd of PAR will be undefined");
    }
  }
  return c;
}

inline Corpus load_corpus(const std::string& path) { return parse_corpus(read_file(path)); }

inline std::string serialize_corpus(const std::vector<PromptSpec>& prompts) {
  std::string out;
  for (const auto& p : prompts) {
    nlohmann::json j;
    j["id"] = p.id;
    j["style"] = std::string(to_string(p.style));
    j["dataset"] = p.dataset;
    j["template"] = p.template_text;
    out += j.dump() + "\n";
  }
  return out;
}

inline void save_corpus(const std::string& path, const std::vector<PromptSpec>& prompts) {
  write_file(path, serialize_corpus(prompts));
}

struct DatasetSample {
  std::string sample_id;
  std::string text;
  std::size_t gold = 0;

  friend bool operator==(const DatasetSample&, const DatasetSample&) = default;
};

struct Dataset {
  std::vector<DatasetSample> samples;  // file order
  std::vector<std::size_t> class_counts;

  std::vector<std::size_t> gold() const {
    std::vector<std::size_t> g;
    g.reserve(samples.size());
    for (const auto& s : samples) g.push_back(s.gold);
    return g;
  }
};

inline Dataset parse_dataset(const std::string& text, const LabelSchema& schema) {
  Dataset d;
  d.class_counts.assign(schema.size(), 0);
  std::map<std::string, std::size_t> seen;
  detail::for_each_jsonl(text, "dataset", [&](const nlohmann::json& j, std::size_t lineno) {
    DatasetSample s;
    s.sample_id = j.at("sample_id").get<std::string>();
    s.text = j.at("text").get<std::string>();
    const auto gold = j.at("gold").get<std::string>();
    auto idx = schema.find(gold);
    if (!idx) {
      if (schema.is_extra(gold)) {
        throw Error("dataset line " + std::to_string(lineno) + ": '" + gold +
                    "' is an extra label and cannot be gold");
      }
      throw Error("dataset line " + std::to_string(lineno) + ": unknown gold label '" + gold +
                  "'");
    }
    s.gold = *idx;
    if (!seen.emplace(s.sample_id, lineno).second) {
      throw Error("dataset line " + std::to_string(lineno) + ": duplicate sample_id '" +
                  s.sample_id + "'");
    }
    ++d.class_counts[s.gold];
    d.samples.push_back(std::move(s));
  });
  if (d.samples.empty()) throw Error("dataset has no samples");
  return d;
}

inline Dataset load_dataset(const std::string& path, const LabelSchema& schema) {
  return parse_dataset(read_file(path), schema);
}

inline std::string serialize_dataset(const std::vector<DatasetSample>& samples,
                                     const LabelSchema& schema) {
  std::string out;
  for (const auto& s : samples) {
    nlohmann::json j;
    j["sample_id"] = s.sample_id;
    j["text"] = s.text;
    j["gold"] = schema.labels().at(s.gold);
    out += j.dump() + "\n";
  }
  return out;
}

inline void save_dataset(const std::string& path, const std::vector<DatasetSample>& samples,
                         const LabelSchema& schema) {
  write_file(path, serialize_dataset(samples, schema));
}

inline std::string serialize_matrix(const AnnotationMatrix& m) {
  nlohmann::json h;
  h["format"] = "ipr-matrix";
  h["version"] = kMatrixFormatVersion;
  h["schema"] = m.schema().to_json();
  h["dataset"] = m.dataset_name;
  h["model"] = m.model;
  h["prompts"] = nlohmann::json::array();
  for (const auto& p : m.prompts()) h["prompts"].push_back({{"id", p.id}, {"style", p.style}});
  h["samples"] = m.samples();
  h["gold"] = m.gold() ? nlohmann::json(*m.gold()) : nlohmann::json(nullptr);

  std::string out = h.dump() + "\n";
  for (std::size_t p = 0; p < m.num_prompts(); ++p) {
    for (std::size_t s = 0; s < m.num_samples(); ++s) {
      const Cell& c = m.cell(p, s);
      nlohmann::json j;
      j["p"] = p;
      j["s"] = s;
      j["status"] = c.status == CellStatus::kOk ? "ok" : "failed";
      j["outcome"] = std::string(to_string(c.parsed.outcome));
      if (c.parsed.outcome == ParsedLabel::Outcome::kValid) j["label"] = c.parsed.index;
      if (c.parsed.outcome == ParsedLabel::Outcome::kExtra) j["extra"] = c.parsed.extra_name;
      j["matched"] = c.parsed.matched_text;
      j["raw"] = c.raw;
      j["fp"] = c.fingerprint;
      out += j.dump() + "\n";
    }
  }
  out += nlohmann::json{{"end", true}, {"cells", m.num_prompts() * m.num_samples()}}.dump() + "\n";
  return out;
}

inline void save_matrix(const std::string& path, const AnnotationMatrix& m) {
  write_file(path, serialize_matrix(m));
}

inline AnnotationMatrix parse_matrix(const std::string& text) {
  std::optional<AnnotationMatrix> m;
  std::vector<bool> filled;
  bool ended = false;
  detail::for_each_jsonl(text, "matrix", [&](const nlohmann::json& j, std::size_t lineno) {
    const std::string where = "matrix line " + std::to_string(lineno) + ": ";
    if (ended) throw Error(where + "record after end marker");
    if (!m) {
      if (j.value("format", std::string()) != "ipr-matrix") throw Error(where + "not a matrix file");
      const int version = j.at("version").get<int>();
      if (version != kMatrixFormatVersion) {
        throw Error(where + "unsupported matrix version " + std::to_string(version));
      }
      std::vector<PromptInfo> prompts;
      for (const auto& p : j.at("prompts")) {
        prompts.push_back({p.at("id").get<std::string>(), p.value("style", std::string())});
      }
      std::optional<std::vector<std::size_t>> gold;
      if (!j.at("gold").is_null()) gold = j.at("gold").get<std::vector<std::size_t>>();
      m.emplace(schema_from_json(j.at("schema")), std::move(prompts),
                j.at("samples").get<std::vector<std::string>>(), std::move(gold));
      m->dataset_name = j.value("dataset", std::string());
      m->model = j.value("model", std::string());
      filled.assign(m->num_prompts() * m->num_samples(), false);
      return;
    }
    if (j.contains("end")) {
      if (j.at("cells").get<std::size_t>() != filled.size()) throw Error(where + "cell count mismatch");
      ended = true;
      return;
    }
    const auto p = j.at("p").get<std::size_t>();
    const auto s = j.at("s").get<std::size_t>();
    if (p >= m->num_prompts() || s >= m->num_samples()) throw Error(where + "cell out of range");
    if (filled[p * m->num_samples() + s]) throw Error(where + "duplicate cell");
    Cell c;
    const auto status = j.at("status").get<std::string>();
    if (status == "ok") {
      c.status = CellStatus::kOk;
    } else if (status == "failed") {
      c.status = CellStatus::kFailed;
    } else {
      throw Error(where + "unknown cell status '" + status + "'");
    }
    c.parsed.outcome = parse_outcome(j.at("outcome").get<std::string>());
    if (c.parsed.outcome == ParsedLabel::Outcome::kValid) {
      c.parsed.index = j.at("label").get<std::size_t>();
      if (c.parsed.index >= m->schema().size()) {
        throw Error(where + "label index " + std::to_string(c.parsed.index) +
                    " out of schema range");
      }
    } else if (c.parsed.outcome == ParsedLabel::Outcome::kExtra) {
      c.parsed.extra_name = j.at("extra").get<std::string>();
      if (!m->schema().is_extra(c.parsed.extra_name)) {
        throw Error(where + "'" + c.parsed.extra_name + "' is not an extra label of the schema");
      }
    }
    c.parsed.matched_text = j.value("matched", std::string());
    c.raw = j.value("raw", std::string());
    c.fingerprint = j.value("fp", std::string());
    m->set_cell(p, s, std::move(c));
    filled[p * m->num_samples() + s] = true;
  });
  if (!m) throw Error("matrix file is empty");
  if (!ended) throw Error("matrix file is truncated (no end record)");
  for (bool f : filled) {
    if (!f) throw Error("matrix file is truncated (missing cells)");
  }
  return std::move(*m);
}

inline AnnotationMatrix load_matrix(const std::string& path) { return parse_matrix(read_file(path)); }

// The standard, analytical and contextual prompts for the two shipped
// datasets, with the sample placeholder appended after the instruction.
inline std::vector<PromptSpec> reference_prompts(std::string_view dataset) {
  auto with_sample = [](std::string instruction) {
    return instruction + "\n\n" + std::string(kSamplePlaceholder);
  };
  if (dataset == "trec6") {
    return {
        {"trec-standard", PromptStyle::kStandard, "trec6",
         with_sample("Classify the questions based on the answer type from Number, Location, "
                     "Person, Description, Entity, or Abbreviation.")},
        {"trec-analytical", PromptStyle::kAnalytical, "trec6",
         with_sample("Identify the kind of information the following question is requesting from "
                     "Number, Location, Person, Description, Entity, or Abbreviation.")},
        {"trec-contextual", PromptStyle::kContextual, "trec6",
         with_sample("Read the question and determine the kind of answer that best fits its "
                     "intent from Number, Location, Person, Description, Entity, or "
                     "Abbreviation.")},
    };
  }
  if (dataset == "politifact6") {
    return {
        {"politifact-standard", PromptStyle::kStandard, "politifact6",
         with_sample(
             "Can you fact-check a statement for me? When fact-checking, avoid negations and only "
             "use one of the following labels to classify each statement:\n"
             "TRUE – The statement is accurate and there’s nothing significant missing.\n"
             "MOSTLY TRUE – The statement is accurate but needs clarification or additional "
             "information.\n"
             "HALF TRUE – The statement is partially accurate but leaves out important details "
             "or takes things out of context.\n"
             "MOSTLY FALSE – The statement contains an element of truth but ignores critical "
             "facts that would give a different impression.\n"
             "FALSE – The statement is not accurate.\n"
             "PANTS ON FIRE – The statement is not accurate and makes a ridiculous claim.\n"
             "NO VERDICT – The statement lacks sufficient context, or there is not enough "
             "information to assess the veracity of the statement.")},
        {"politifact-analytical", PromptStyle::kAnalytical, "politifact6",
         with_sample(
             "Classify the factual accuracy of the statement using one of the labels. Return only "
             "the label:\n\n"
             "TRUE – The statement is correct and does not omit any important information.\n"
             "MOSTLY TRUE – The statement is generally correct but requires some clarification "
             "or additional context.\n"
             "HALF TRUE – The statement contains some accurate elements but leaves out key "
             "details or misrepresents context.\n"
             "MOSTLY FALSE – The statement has a small amount of truth but ignores essential "
             "facts that change the whole interpretation.\n"
             "FALSE – The statement is incorrect.\n"
             "PANTS ON FIRE – The statement is completely false and highly misleading.\n"
             "NO VERDICT – There is insufficient information to determine whether the "
             "statement is accurate.")},
        {"politifact-contextual", PromptStyle::kContextual, "politifact6",
         with_sample(
             "Can you help me check if this statement is true? Based on your understanding, "
             "choose the best label. Return only the label:\n\n"
             "TRUE – The statement is correct and nothing important is missing.\n"
             "MOSTLY TRUE – The statement is mostly correct but could use more explanation.\n"
             "HALF TRUE – The statement has some truth but leaves out key details.\n"
             "MOSTLY FALSE – The statement contains a bit of truth but ignores important "
             "facts.\n"
             "FALSE – The statement is not correct.\n"
             "PANTS ON FIRE – The statement is completely false and very misleading.\n"
             "NO VERDICT – There isn’t enough information to evaluate it.")},
    };
  }
  throw Error("no shipped prompts for dataset '" + std::string(dataset) + "'");
}

}  // namespace ipr

#endif  // IPR_CORPUS_IO_HPP_
