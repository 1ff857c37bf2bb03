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

#ifndef IPR_ANNOTATION_MATRIX_HPP_
#define IPR_ANNOTATION_MATRIX_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ipr/error.hpp"
#include "ipr/label_schema.hpp"

namespace ipr {

enum class CellStatus { kOk, kFailed };

// One (prompt, sample) annotation. `raw` and `fingerprint` are provenance:
// the parsed label can always be recomputed from `raw` and the schema.
struct Cell {
  ParsedLabel parsed;
  CellStatus status = CellStatus::kOk;
  std::string raw;
  std::string fingerprint;

  Label label() const { return status == CellStatus::kOk ? parsed.label() : std::nullopt; }

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct PromptInfo {
  std::string id;
  std::string style;  // analytical | contextual | standard, or empty when unknown

  friend bool operator==(const PromptInfo&, const PromptInfo&) = default;
};

// P prompts x N samples, stored row-major (one row per prompt).
class AnnotationMatrix {
 public:
  AnnotationMatrix(LabelSchema schema, std::vector<PromptInfo> prompts,
                   std::vector<std::string> samples,
                   std::optional<std::vector<std::size_t>> gold = std::nullopt)
      : schema_(std::move(schema)),
        prompts_(std::move(prompts)),
        samples_(std::move(samples)),
        gold_(std::move(gold)) {
    if (prompts_.empty()) throw Error("annotation matrix needs at least one prompt");
    if (samples_.empty()) throw Error("annotation matrix needs at least one sample");
    if (gold_) {
      if (gold_->size() != samples_.size()) {
        throw Error("gold vector has " + std::to_string(gold_->size()) + " entries, expected " +
                    std::to_string(samples_.size()));
      }
      for (std::size_t g : *gold_) {
        if (g >= schema_.size()) throw Error("gold label index out of schema range");
      }
    }
    cells_.resize(prompts_.size() * samples_.size());
  }

  const LabelSchema& schema() const { return schema_; }
  const std::vector<PromptInfo>& prompts() const { return prompts_; }
  const std::vector<std::string>& samples() const { return samples_; }
  const std::optional<std::vector<std::size_t>>& gold() const { return gold_; }
  std::size_t num_prompts() const { return prompts_.size(); }
  std::size_t num_samples() const { return samples_.size(); }

  std::vector<std::string> prompt_ids() const {
    std::vector<std::string> ids;
    ids.reserve(prompts_.size());
    for (const auto& p : prompts_) ids.push_back(p.id);
    return ids;
  }

  const Cell& cell(std::size_t prompt, std::size_t sample) const {
    return cells_.at(prompt * samples_.size() + sample);
  }

  void set_cell(std::size_t prompt, std::size_t sample, Cell c) {
    if (c.status == CellStatus::kOk && c.parsed.is_valid() && c.parsed.index >= schema_.size()) {
      throw Error("cell label index " + std::to_string(c.parsed.index) + " out of schema range");
    }
    cells_.at(prompt * samples_.size() + sample) = std::move(c);
  }

  // Convenience for synthetic or hand-built matrices.
  void set_label(std::size_t prompt, std::size_t sample, Label label) {
    Cell c;
    if (label) {
      c.parsed = ParsedLabel::valid(*label, schema_.labels().at(*label));
      c.raw = schema_.labels()[*label];
    }
    set_cell(prompt, sample, std::move(c));
  }

  std::vector<Label> row(std::size_t prompt) const {
    std::vector<Label> out(samples_.size());
    for (std::size_t s = 0; s < samples_.size(); ++s) out[s] = cell(prompt, s).label();
    return out;
  }

  // Ordinal scores of a row; non-valid cells are nullopt.
  std::vector<std::optional<double>> score_row(std::size_t prompt) const {
    std::vector<std::optional<double>> out(samples_.size());
    for (std::size_t s = 0; s < samples_.size(); ++s) {
      if (auto l = cell(prompt, s).label()) out[s] = schema_.score(*l);
    }
    return out;
  }

  std::size_t count_invalid() const {
    std::size_t n = 0;
    for (const auto& c : cells_) n += c.label() ? 0 : 1;
    return n;
  }
  std::size_t count_failed() const {
    std::size_t n = 0;
    for (const auto& c : cells_) n += c.status == CellStatus::kFailed ? 1 : 0;
    return n;
  }
  std::size_t count_extra() const {
    std::size_t n = 0;
    for (const auto& c : cells_) {
      n += (c.status == CellStatus::kOk && c.parsed.outcome == ParsedLabel::Outcome::kExtra) ? 1
                                                                                             : 0;
    }
    return n;
  }

  // Free-form provenance carried into files and reports.
  std::string dataset_name;
  std::string model;

  friend bool operator==(const AnnotationMatrix& a, const AnnotationMatrix& b) {
    return a.schema_ == b.schema_ && a.prompts_ == b.prompts_ && a.samples_ == b.samples_ &&
           a.gold_ == b.gold_ && a.cells_ == b.cells_ && a.dataset_name == b.dataset_name &&
           a.model == b.model;
  }

 private:
  LabelSchema schema_;
  std::vector<PromptInfo> prompts_;
  std::vector<std::string> samples_;
  std::optional<std::vector<std::size_t>> gold_;
  std::vector<Cell> cells_;
};

}  // namespace ipr

#endif  // IPR_ANNOTATION_MATRIX_HPP_
