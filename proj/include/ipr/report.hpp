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

#ifndef IPR_REPORT_HPP_
#define IPR_REPORT_HPP_

#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ipr/annotation_matrix.hpp"
#include "ipr/metrics.hpp"
#include "ipr/voting.hpp"
#include "json.hpp"

namespace ipr {

struct StyleRow {
  std::string group;  // a prompt style, or "overall"
  Summary stats;
};

struct RunReport {
  std::string dataset;
  std::string model;
  std::string schema;
  std::string matrix_fingerprint;
  std::size_t prompts = 0;
  std::size_t samples = 0;
  std::size_t invalid_cells = 0;
  std::size_t extra_cells = 0;
  std::size_t failed_cells = 0;
  std::vector<StyleRow> accuracy;   // empty without gold
  std::vector<StyleRow> closeness;  // empty unless ordinal with gold
  std::optional<double> mean_accuracy_over_valid;
  std::vector<double> prompt_accuracy;
  std::vector<double> prompt_closeness;
  std::vector<ParMatrix> par;  // discrete, then graded when ordinal
  std::optional<AggregationResult> sweep;
  std::vector<std::string> prompt_ids;
  std::vector<std::string> prompt_styles;

  nlohmann::json to_json() const;
  std::string to_markdown() const;
};

namespace detail {

inline std::vector<StyleRow> style_rows(const std::vector<std::string>& styles,
                                        const std::vector<double>& values) {
  std::map<std::string, std::vector<double>> groups;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!styles[i].empty()) groups[styles[i]].push_back(values[i]);
  }
  std::vector<StyleRow> rows;
  for (const auto& [style, v] : groups) rows.push_back({style, summary_stats(v)});
  rows.push_back({"overall", summary_stats(values)});
  return rows;
}

inline nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json rows_json(const std::vector<StyleRow>& rows) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : rows) {
    a.push_back({{"group", r.group},
                 {"n", r.stats.count},
                 {"mean", r.stats.mean},
                 {"sd", opt_json(r.stats.sd)},
                 {"min", r.stats.min},
                 {"max", r.stats.max}});
  }
  return a;
}

inline std::string fmt3(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", *v);
  return buf;
}

}  // namespace detail

inline RunReport build_report(const AnnotationMatrix& m, std::string matrix_fingerprint,
                              std::optional<AggregationResult> sweep = std::nullopt) {
  RunReport r;
  r.dataset = m.dataset_name;
  r.model = m.model;
  r.schema = m.schema().name();
  r.matrix_fingerprint = std::move(matrix_fingerprint);
  r.prompts = m.num_prompts();
  r.samples = m.num_samples();
  r.invalid_cells = m.count_invalid();
  r.extra_cells = m.count_extra();
  r.failed_cells = m.count_failed();
  for (const auto& p : m.prompts()) {
    r.prompt_ids.push_back(p.id);
    r.prompt_styles.push_back(p.style);
  }
  if (m.gold()) {
    r.prompt_accuracy = per_prompt_accuracy(m);
    r.accuracy = detail::style_rows(r.prompt_styles, r.prompt_accuracy);
    std::vector<double> valid_acc;
    for (std::size_t i = 0; i < m.num_prompts(); ++i) {
      if (auto a = accuracy_over_valid(m.row(i), *m.gold())) valid_acc.push_back(*a);
    }
    if (!valid_acc.empty()) r.mean_accuracy_over_valid = summary_stats(valid_acc).mean;
    if (m.schema().is_ordinal()) {
      r.prompt_closeness = per_prompt_closeness(m);
      r.closeness = detail::style_rows(r.prompt_styles, r.prompt_closeness);
    }
  }
  r.par.push_back(par_matrix(m, ParMode::kDiscrete));
  if (m.schema().is_ordinal()) r.par.push_back(par_matrix(m, ParMode::kGraded));
  r.sweep = std::move(sweep);
  return r;
}

inline nlohmann::json RunReport::to_json() const {
  nlohmann::json j;
  j["dataset"] = dataset;
  j["model"] = model;
  j["schema"] = schema;
  j["matrix_fingerprint"] = matrix_fingerprint;
  j["prompts"] = prompts;
  j["samples"] = samples;
  j["cells"] = {{"invalid", invalid_cells}, {"extra", extra_cells}, {"failed", failed_cells}};
  if (!accuracy.empty()) {
    j["accuracy"] = detail::rows_json(accuracy);
    j["mean_accuracy_over_valid"] = detail::opt_json(mean_accuracy_over_valid);
    j["prompt_accuracy"] = prompt_accuracy;
  }
  if (!closeness.empty()) {
    j["closeness"] = detail::rows_json(closeness);
    j["prompt_closeness"] = prompt_closeness;
  }
  j["par"] = nlohmann::json::array();
  for (const auto& pm : par) j["par"].push_back(pm.summary_json());
  if (sweep) j["sweep"] = sweep->to_json();
  return j;
}

inline std::string RunReport::to_markdown() const {
  std::ostringstream os;
  os << "# Inter-prompt reliability report\n\n";
  os << "- dataset: " << dataset << "\n- model: " << model << "\n- schema: " << schema
     << "\n- prompts x samples: " << prompts << " x " << samples
     << "\n- matrix sha256: " << matrix_fingerprint << "\n- non-valid cells: " << invalid_cells
     << " (extra labels " << extra_cells << ", failed requests " << failed_cells << ")\n\n";

  auto table = [&](const char* title, const std::vector<StyleRow>& rows) {
    os << "## " << title << "\n\n| Group | N | Mean | Std | Min | Max |\n|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
      os << "| " << r.group << " | " << r.stats.count << " | " << detail::fmt3(r.stats.mean)
         << " | " << detail::fmt3(r.stats.sd) << " | " << detail::fmt3(r.stats.min) << " | "
         << detail::fmt3(r.stats.max) << " |\n";
    }
    os << '\n';
  };
  if (!accuracy.empty()) {
    table("Prompt-level accuracy", accuracy);
    os << "Invalid outputs count as wrong above; mean accuracy over valid outputs only: "
       << detail::fmt3(mean_accuracy_over_valid) << "\n\n";
  }
  if (!closeness.empty()) table("Prompt-level closeness", closeness);

  os << "## Pairwise agreement\n\n| Mode | Mean PAR | SD PAR | Min | Max | Spread | Undefined pairs |\n"
        "|---|---|---|---|---|---|---|\n";
  for (const auto& pm : par) {
    auto lo = pm.min_pair();
    auto hi = pm.max_pair();
    os << "| " << to_string(pm.mode()) << " | " << detail::fmt3(pm.mean()) << " | "
       << detail::fmt3(pm.sd()) << " | "
       << (lo ? detail::fmt3(lo->value) + " (" + pm.ids()[lo->i] + ", " + pm.ids()[lo->j] + ")"
              : std::string("n/a"))
       << " | "
       << (hi ? detail::fmt3(hi->value) + " (" + pm.ids()[hi->i] + ", " + pm.ids()[hi->j] + ")"
              : std::string("n/a"))
       << " | " << detail::fmt3(pm.spread()) << " | " << pm.undefined_pairs() << " |\n";
  }
  if (prompts < 2) os << "\nWith a single prompt there are no pairs; mean and SD of PAR are undefined.\n";
  os << '\n';

  if (sweep) {
    os << "## Majority-vote aggregation (draws " << sweep->config.draws << ", seed "
       << sweep->config.seed << ")\n\n| k | Mean PAR | SD PAR | Mean Acc | SD Acc |\n|---|---|---|---|---|\n";
    for (const auto& rec : sweep->records) {
      std::optional<double> ma;
      std::optional<double> sa;
      if (!rec.accuracy.empty()) {
        auto s = summary_stats(rec.accuracy);
        ma = s.mean;
        sa = s.sd;
      }
      os << "| " << rec.k << " | " << detail::fmt3(rec.par.mean()) << " | "
         << detail::fmt3(rec.par.sd()) << " | " << detail::fmt3(ma) << " | " << detail::fmt3(sa)
         << " |\n";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace ipr

#endif  // IPR_REPORT_HPP_
