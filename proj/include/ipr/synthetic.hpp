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

// Seeded label-flip annotators used as ground truth for the metrics.
//
// Each annotator keeps the gold label with probability 1 - flip_rate. A flip
// always lands on a different label:
//   stochastic (no bias target): uniform over the other L - 1 labels;
//   systematic (bias target t):  t, or (t + 1) mod L when gold is t.
// Annotator i draws from stream i of its own seed, two values per sample,
// so rows are reproducible regardless of flip outcomes.

#ifndef IPR_SYNTHETIC_HPP_
#define IPR_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipr/annotation_matrix.hpp"
#include "ipr/error.hpp"
#include "ipr/label_schema.hpp"
#include "ipr/rng.hpp"
#include "json.hpp"

namespace ipr {

enum class NoiseMode { kStochastic, kSystematic };

struct AnnotatorModel {
  double flip_rate = 0.0;
  std::optional<std::size_t> bias_target;
  std::uint64_t seed = 0;

  NoiseMode mode() const { return bias_target ? NoiseMode::kSystematic : NoiseMode::kStochastic; }
};

inline std::vector<std::size_t> uniform_gold(std::size_t n, std::size_t num_labels,
                                             std::uint64_t seed) {
  if (num_labels == 0) throw Error("uniform_gold: no labels");
  Rng rng(seed, ~std::uint64_t{0});
  std::vector<std::size_t> out(n);
  for (auto& g : out) g = static_cast<std::size_t>(rng.bounded(num_labels));
  return out;
}

inline std::string synthetic_id(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, i);
  return buf;
}

inline AnnotationMatrix synth_panel(const LabelSchema& schema, std::span<const std::size_t> gold,
                                    std::span<const AnnotatorModel> models) {
  if (gold.empty()) throw Error("synth_panel: empty gold vector");
  if (models.empty()) throw Error("synth_panel: no annotators");
  const std::size_t num_labels = schema.size();
  if (num_labels < 2) throw Error("synth_panel: schema needs at least two labels");
  for (const auto& m : models) {
    if (!(m.flip_rate >= 0.0 && m.flip_rate <= 1.0)) {
      throw Error("synth_panel: flip_rate must be in [0, 1]");
    }
    if (m.bias_target && *m.bias_target >= num_labels) {
      throw Error("synth_panel: bias_target is not a schema label");
    }
  }

  std::vector<PromptInfo> prompts;
  for (std::size_t i = 0; i < models.size(); ++i) prompts.push_back({synthetic_id("a", i, 2), ""});
  std::vector<std::string> samples;
  for (std::size_t x = 0; x < gold.size(); ++x) samples.push_back(synthetic_id("x", x, 4));

  AnnotationMatrix m(schema, std::move(prompts), std::move(samples),
                     std::vector<std::size_t>(gold.begin(), gold.end()));
  m.dataset_name = "synthetic";
  m.model = "synthetic";

  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& model = models[i];
    Rng rng(model.seed, i);
    for (std::size_t x = 0; x < gold.size(); ++x) {
      const double u = rng.uniform();
      const auto other = static_cast<std::size_t>(rng.bounded(num_labels - 1));
      std::size_t label = gold[x];
      if (u < model.flip_rate) {
        if (model.bias_target) {
          const std::size_t t = *model.bias_target;
          label = gold[x] != t ? t : (t + 1) % num_labels;
        } else {
          label = other >= gold[x] ? other + 1 : other;
        }
      }
      m.set_label(i, x, label);
    }
  }
  return m;
}

// Probability that two independent annotators with the same flip rate agree.
// Systematic mode assumes both share the bias target.
inline double expected_pairwise_agreement(double flip_rate, std::size_t num_labels,
                                          NoiseMode mode) {
  if (num_labels < 2) throw Error("expected_pairwise_agreement: need at least two labels");
  if (!(flip_rate >= 0.0 && flip_rate <= 1.0)) {
    throw Error("expected_pairwise_agreement: flip_rate must be in [0, 1]");
  }
  const double keep = 1.0 - flip_rate;
  if (mode == NoiseMode::kSystematic) return keep * keep + flip_rate * flip_rate;
  return keep * keep + flip_rate * flip_rate / static_cast<double>(num_labels - 1);
}

// Panel config:
//   {"schema": "trec6" | {...}, "samples": 500, "gold_seed": 7,
//    "annotators": [{"count": 20, "flip_rate": 0.3, "seed": 42,
//                    "bias_target": "Location"}]}
// "gold" (list of label names) may replace "samples"/"gold_seed".
struct PanelConfig {
  LabelSchema schema;
  std::vector<std::size_t> gold;
  std::vector<AnnotatorModel> annotators;
};

inline PanelConfig panel_config_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ConfigError("panel config must be a JSON object");
    PanelConfig cfg;
    const auto& s = j.at("schema");
    if (s.is_string()) {
      auto b = builtin_schema(s.get<std::string>());
      if (!b) throw ConfigError("unknown built-in schema '" + s.get<std::string>() + "'");
      cfg.schema = *b;
    } else {
      cfg.schema = schema_from_json(s);
    }
    if (j.contains("gold")) {
      for (const auto& name : j.at("gold")) {
        auto idx = cfg.schema.find(name.get<std::string>());
        if (!idx) throw ConfigError("gold label '" + name.get<std::string>() + "' not in schema");
        cfg.gold.push_back(*idx);
      }
    } else {
      const auto n = j.at("samples").get<std::size_t>();
      if (n == 0) throw ConfigError("panel config: samples must be positive");
      cfg.gold = uniform_gold(n, cfg.schema.size(), j.value("gold_seed", std::uint64_t{0}));
    }
    for (const auto& a : j.at("annotators")) {
      AnnotatorModel m;
      m.flip_rate = a.at("flip_rate").get<double>();
      m.seed = a.value("seed", std::uint64_t{0});
      if (a.contains("bias_target") && !a.at("bias_target").is_null()) {
        auto idx = cfg.schema.find(a.at("bias_target").get<std::string>());
        if (!idx) throw ConfigError("bias_target is not a schema label");
        m.bias_target = *idx;
      }
      if (!(m.flip_rate >= 0.0 && m.flip_rate <= 1.0)) {
        throw ConfigError("panel config: flip_rate must be in [0, 1]");
      }
      const auto count = a.value("count", std::size_t{1});
      for (std::size_t c = 0; c < count; ++c) cfg.annotators.push_back(m);
    }
    if (cfg.annotators.empty()) throw ConfigError("panel config has no annotators");
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed panel config: ") + e.what());
  }
}

inline AnnotationMatrix simulate(const PanelConfig& cfg) {
  return synth_panel(cfg.schema, cfg.gold, cfg.annotators);
}

}  // namespace ipr

#endif  // IPR_SYNTHETIC_HPP_
