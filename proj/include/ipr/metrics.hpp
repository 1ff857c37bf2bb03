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

// Agreement statistics over annotation matrices.
//
// Pairwise agreement rate (PAR) between two prompts is the fraction of
// samples on which they emit the same label (discrete mode), or the mean of
// 1 - |s_i - s_j| / D over ordinal scores (graded mode). Only samples where
// both cells are valid labels are compared; the number compared is reported
// as coverage. Across a panel of P prompts the mean and the sample standard
// deviation (denominator C(P,2) - 1) are taken over the strict upper
// triangle. Statistics that have no data behind them are nullopt, never 0.

#ifndef IPR_METRICS_HPP_
#define IPR_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ipr/annotation_matrix.hpp"
#include "ipr/error.hpp"
#include "ipr/label_schema.hpp"
#include "ipr/text_util.hpp"
#include "json.hpp"

namespace ipr {

enum class ParMode { kDiscrete, kGraded };

inline std::string_view to_string(ParMode m) {
  return m == ParMode::kGraded ? "graded" : "discrete";
}

inline ParMode parse_par_mode(std::string_view s) {
  if (s == "discrete") return ParMode::kDiscrete;
  if (s == "graded") return ParMode::kGraded;
  throw ConfigError("unknown PAR mode '" + std::string(s) + "' (expected discrete or graded)");
}

struct PairAgreement {
  std::optional<double> value;  // nullopt when compared == 0
  std::size_t compared = 0;
};

inline PairAgreement par_discrete(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) throw Error("par_discrete: label vectors differ in length");
  std::size_t compared = 0;
  std::size_t same = 0;
  for (std::size_t x = 0; x < a.size(); ++x) {
    if (!a[x] || !b[x]) continue;
    ++compared;
    if (*a[x] == *b[x]) ++same;
  }
  if (compared == 0) return {std::nullopt, 0};
  return {static_cast<double>(same) / static_cast<double>(compared), compared};
}

inline PairAgreement par_graded(std::span<const std::optional<double>> a,
                                std::span<const std::optional<double>> b, double max_distance) {
  if (a.size() != b.size()) throw Error("par_graded: score vectors differ in length");
  if (!(max_distance > 0)) throw Error("par_graded: max distance must be positive");
  std::size_t compared = 0;
  double sum = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) {
    if (!a[x] || !b[x]) continue;
    const double d = std::abs(*a[x] - *b[x]);
    if (d > max_distance) throw Error("par_graded: score distance exceeds max distance");
    ++compared;
    sum += 1.0 - d / max_distance;
  }
  if (compared == 0) return {std::nullopt, 0};
  return {sum / static_cast<double>(compared), compared};
}

struct Summary {
  double mean = 0;
  std::optional<double> sd;  // needs at least two values
  double min = 0;
  double max = 0;
  std::size_t count = 0;
};

// Two-pass mean and sample standard deviation (n - 1).
inline Summary summary_stats(std::span<const double> values) {
  if (values.empty()) throw Error("summary_stats: empty input");
  Summary s;
  s.count = values.size();
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

class ParMatrix {
 public:
  ParMatrix(ParMode mode, std::vector<std::string> ids)
      : mode_(mode),
        ids_(std::move(ids)),
        values_(ids_.size() * ids_.size()),
        coverage_(ids_.size() * ids_.size(), 0) {}

  ParMode mode() const { return mode_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  const std::optional<double>& value(std::size_t i, std::size_t j) const {
    return values_.at(i * ids_.size() + j);
  }
  std::size_t coverage(std::size_t i, std::size_t j) const {
    return coverage_.at(i * ids_.size() + j);
  }

  void set(std::size_t i, std::size_t j, const PairAgreement& pa) {
    values_.at(i * ids_.size() + j) = pa.value;
    values_.at(j * ids_.size() + i) = pa.value;
    coverage_.at(i * ids_.size() + j) = pa.compared;
    coverage_.at(j * ids_.size() + i) = pa.compared;
  }

  // Defined strict-upper-triangle values in (i, j) row-major order.
  std::vector<double> upper_values() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t j = i + 1; j < size(); ++j) {
        if (const auto& v = value(i, j)) out.push_back(*v);
      }
    }
    return out;
  }

  std::size_t pair_count() const { return size() * (size() - 1) / 2; }

  std::size_t undefined_pairs() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t j = i + 1; j < size(); ++j) n += value(i, j) ? 0 : 1;
    }
    return n;
  }

  // mu_PAR
  std::optional<double> mean() const {
    auto v = upper_values();
    if (v.empty()) return std::nullopt;
    return summary_stats(v).mean;
  }

  // sigma_PAR
  std::optional<double> sd() const {
    auto v = upper_values();
    if (v.size() < 2) return std::nullopt;
    return summary_stats(v).sd;
  }

  struct Extreme {
    double value;
    std::size_t i;
    std::size_t j;
  };
  // First pair (in upper-triangle order) attaining the minimum / maximum.
  std::optional<Extreme> min_pair() const { return extreme(false); }
  std::optional<Extreme> max_pair() const { return extreme(true); }

  // Max minus min over defined pairs.
  std::optional<double> spread() const {
    auto lo = min_pair();
    auto hi = max_pair();
    if (!lo || !hi) return std::nullopt;
    return hi->value - lo->value;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "prompt";
    for (const auto& id : ids_) os << ',' << csv_field(id);
    os << '\n';
    for (std::size_t i = 0; i < size(); ++i) {
      os << csv_field(ids_[i]);
      for (std::size_t j = 0; j < size(); ++j) os << ',' << format_optional(value(i, j));
      os << '\n';
    }
    return os.str();
  }

  nlohmann::json summary_json() const {
    auto opt = [](const std::optional<double>& v) -> nlohmann::json {
      return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    nlohmann::json j;
    j["mode"] = std::string(to_string(mode_));
    j["prompts"] = size();
    j["pairs"] = pair_count();
    j["mean"] = opt(mean());
    j["sd"] = opt(sd());
    auto lo = min_pair();
    auto hi = max_pair();
    j["min"] = lo ? nlohmann::json(lo->value) : nlohmann::json(nullptr);
    j["max"] = hi ? nlohmann::json(hi->value) : nlohmann::json(nullptr);
    j["min_pair"] = lo ? nlohmann::json::array({ids_[lo->i], ids_[lo->j]}) : nlohmann::json(nullptr);
    j["max_pair"] = hi ? nlohmann::json::array({ids_[hi->i], ids_[hi->j]}) : nlohmann::json(nullptr);
    j["spread"] = opt(spread());
    j["undefined_pairs"] = undefined_pairs();
    if (pair_count() == 0) {
      j["message"] = "fewer than two prompts: mean and sd of PAR are undefined";
    } else if (!sd()) {
      j["message"] = "fewer than two defined prompt pairs: sd of PAR is undefined";
    }
    return j;
  }

 private:
  std::optional<Extreme> extreme(bool want_max) const {
    std::optional<Extreme> best;
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t j = i + 1; j < size(); ++j) {
        const auto& v = value(i, j);
        if (!v) continue;
        if (!best || (want_max ? *v > best->value : *v < best->value)) best = Extreme{*v, i, j};
      }
    }
    return best;
  }

  ParMode mode_;
  std::vector<std::string> ids_;
  std::vector<std::optional<double>> values_;
  std::vector<std::size_t> coverage_;
};

// Parsed form of ParMatrix::to_csv().
struct ParCsv {
  std::vector<std::string> ids;
  std::vector<std::vector<std::optional<double>>> values;
};

inline ParCsv parse_par_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ParCsv out;
  if (!std::getline(in, line)) throw Error("PAR CSV is empty");
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "prompt") throw Error("PAR CSV header must start with 'prompt'");
  out.ids.assign(header.begin() + 1, header.end());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != out.ids.size() + 1) throw Error("PAR CSV row has wrong field count");
    if (fields[0] != out.ids[out.values.size()]) throw Error("PAR CSV row id mismatch");
    std::vector<std::optional<double>> row;
    for (std::size_t k = 1; k < fields.size(); ++k) row.push_back(parse_optional_double(fields[k]));
    out.values.push_back(std::move(row));
  }
  if (out.values.size() != out.ids.size()) throw Error("PAR CSV is not square");
  return out;
}

// Discrete PAR over arbitrary label rows (prompts, or composite annotators).
inline ParMatrix par_matrix_discrete(std::vector<std::string> ids,
                                     const std::vector<std::vector<Label>>& rows) {
  if (ids.size() != rows.size()) throw Error("par_matrix: id count does not match row count");
  ParMatrix pm(ParMode::kDiscrete, std::move(ids));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i; j < rows.size(); ++j) pm.set(i, j, par_discrete(rows[i], rows[j]));
  }
  return pm;
}

inline ParMatrix par_matrix(const AnnotationMatrix& m, ParMode mode) {
  const std::size_t p = m.num_prompts();
  if (mode == ParMode::kDiscrete) {
    std::vector<std::vector<Label>> rows;
    rows.reserve(p);
    for (std::size_t i = 0; i < p; ++i) rows.push_back(m.row(i));
    return par_matrix_discrete(m.prompt_ids(), rows);
  }
  if (!m.schema().is_ordinal()) {
    throw Error("graded PAR requires an ordinal schema; '" + m.schema().name() +
                "' is categorical");
  }
  const double d = m.schema().max_distance();
  std::vector<std::vector<std::optional<double>>> rows;
  rows.reserve(p);
  for (std::size_t i = 0; i < p; ++i) rows.push_back(m.score_row(i));
  ParMatrix pm(ParMode::kGraded, m.prompt_ids());
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) pm.set(i, j, par_graded(rows[i], rows[j], d));
  }
  return pm;
}

// Fraction correct over all N samples; non-valid predictions count as wrong.
inline double accuracy(std::span<const Label> pred, std::span<const std::size_t> gold) {
  if (pred.size() != gold.size()) throw Error("accuracy: prediction and gold differ in length");
  if (gold.empty()) throw Error("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t x = 0; x < pred.size(); ++x) hits += (pred[x] && *pred[x] == gold[x]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

// Fraction correct over valid predictions only.
inline std::optional<double> accuracy_over_valid(std::span<const Label> pred,
                                                 std::span<const std::size_t> gold) {
  if (pred.size() != gold.size()) throw Error("accuracy: prediction and gold differ in length");
  std::size_t hits = 0;
  std::size_t valid = 0;
  for (std::size_t x = 0; x < pred.size(); ++x) {
    if (!pred[x]) continue;
    ++valid;
    hits += *pred[x] == gold[x] ? 1 : 0;
  }
  if (valid == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(valid);
}

// Mean of 1 - |s_pred - s_gold| / D; non-valid predictions contribute 0.
inline double closeness(std::span<const std::optional<double>> pred, std::span<const double> gold,
                        double max_distance) {
  if (pred.size() != gold.size()) throw Error("closeness: prediction and gold differ in length");
  if (!(max_distance > 0)) throw Error("closeness: max distance must be positive");
  if (gold.empty()) throw Error("closeness: empty input");
  double sum = 0;
  for (std::size_t x = 0; x < pred.size(); ++x) {
    if (!pred[x]) continue;
    const double d = std::abs(*pred[x] - gold[x]);
    if (d > max_distance) throw Error("closeness: score distance exceeds max distance");
    sum += 1.0 - d / max_distance;
  }
  return sum / static_cast<double>(gold.size());
}

inline std::vector<double> gold_scores(const AnnotationMatrix& m) {
  if (!m.gold()) throw Error("matrix has no gold labels");
  std::vector<double> out;
  out.reserve(m.gold()->size());
  for (std::size_t g : *m.gold()) out.push_back(m.schema().score(g));
  return out;
}

inline std::vector<double> per_prompt_accuracy(const AnnotationMatrix& m) {
  if (!m.gold()) throw Error("matrix has no gold labels");
  std::vector<double> out;
  for (std::size_t i = 0; i < m.num_prompts(); ++i) out.push_back(accuracy(m.row(i), *m.gold()));
  return out;
}

inline std::vector<double> per_prompt_closeness(const AnnotationMatrix& m) {
  const auto gold = gold_scores(m);
  const double d = m.schema().max_distance();
  std::vector<double> out;
  for (std::size_t i = 0; i < m.num_prompts(); ++i) out.push_back(closeness(m.score_row(i), gold, d));
  return out;
}

}  // namespace ipr

#endif  // IPR_METRICS_HPP_
