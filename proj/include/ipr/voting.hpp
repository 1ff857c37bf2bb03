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

// Majority voting across prompt subsets.
//
// A composite annotator is the per-sample majority label of a subset of
// prompts. The sweep draws `draws` random k-subsets for each k, builds their
// composites and measures discrete PAR among the composites, plus accuracy
// (and closeness on ordinal schemas) of each composite against gold.

#ifndef IPR_VOTING_HPP_
#define IPR_VOTING_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ipr/annotation_matrix.hpp"
#include "ipr/error.hpp"
#include "ipr/label_schema.hpp"
#include "ipr/metrics.hpp"
#include "ipr/rng.hpp"
#include "ipr/text_util.hpp"
#include "json.hpp"

namespace ipr {

enum class TieRule { kSchemaOrder, kReject };

inline std::string_view to_string(TieRule r) {
  return r == TieRule::kReject ? "reject" : "schema-order";
}

inline TieRule parse_tie_rule(std::string_view s) {
  if (s == "schema-order") return TieRule::kSchemaOrder;
  if (s == "reject") return TieRule::kReject;
  throw ConfigError("unknown tie rule '" + std::string(s) + "' (expected schema-order or reject)");
}

// Non-valid votes are dropped before counting. All-invalid gives nullopt.
inline Label majority_vote(std::span<const Label> votes, std::size_t label_count,
                           TieRule tie_rule = TieRule::kSchemaOrder) {
  if (votes.empty()) throw Error("majority_vote: no votes");
  std::vector<std::size_t> counts(label_count, 0);
  for (const auto& v : votes) {
    if (!v) continue;
    if (*v >= label_count) throw Error("majority_vote: label index out of range");
    ++counts[*v];
  }
  std::size_t best = 0;
  for (std::size_t l = 1; l < label_count; ++l) {
    if (counts[l] > counts[best]) best = l;
  }
  if (counts[best] == 0) return std::nullopt;
  if (tie_rule == TieRule::kReject) {
    for (std::size_t l = 0; l < label_count; ++l) {
      if (l != best && counts[l] == counts[best]) return std::nullopt;
    }
  }
  return best;
}

inline ParsedLabel majority_vote(std::span<const ParsedLabel> votes, const LabelSchema& schema,
                                 TieRule tie_rule = TieRule::kSchemaOrder) {
  std::vector<Label> labels;
  labels.reserve(votes.size());
  for (const auto& v : votes) labels.push_back(v.label());
  auto winner = majority_vote(labels, schema.size(), tie_rule);
  if (!winner) return ParsedLabel::invalid();
  return ParsedLabel::valid(*winner, schema.labels()[*winner]);
}

inline std::vector<Label> composite_annotator(const AnnotationMatrix& m,
                                              std::span<const std::size_t> subset,
                                              TieRule tie_rule = TieRule::kSchemaOrder) {
  if (subset.empty()) throw Error("composite_annotator: empty prompt subset");
  std::vector<bool> used(m.num_prompts(), false);
  for (std::size_t p : subset) {
    if (p >= m.num_prompts()) throw Error("composite_annotator: prompt index out of range");
    if (used[p]) throw Error("composite_annotator: duplicate prompt index");
    used[p] = true;
  }
  std::vector<Label> out(m.num_samples());
  std::vector<Label> votes(subset.size());
  for (std::size_t x = 0; x < m.num_samples(); ++x) {
    for (std::size_t v = 0; v < subset.size(); ++v) votes[v] = m.cell(subset[v], x).label();
    out[x] = majority_vote(votes, m.schema().size(), tie_rule);
  }
  return out;
}

struct VoteConfig {
  std::size_t draws = 50;
  std::uint64_t seed = 42;
  TieRule tie_rule = TieRule::kSchemaOrder;
  // k = 1 uses each prompt exactly once instead of random draws.
  bool enumerate_k1 = false;
};

// k distinct prompt indices, uniformly at random, sorted ascending.
inline std::vector<std::size_t> draw_subset(std::size_t num_prompts, std::size_t k, Rng& rng) {
  if (k == 0 || k > num_prompts) throw Error("draw_subset: k out of range");
  std::vector<std::size_t> pool(num_prompts);
  for (std::size_t i = 0; i < num_prompts; ++i) pool[i] = i;
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t j = t + static_cast<std::size_t>(rng.bounded(num_prompts - t));
    std::swap(pool[t], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

struct SweepRecord {
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> subsets;
  std::vector<std::vector<Label>> composites;
  ParMatrix par{ParMode::kDiscrete, {}};
  std::vector<double> accuracy;   // empty without gold
  std::vector<double> closeness;  // empty unless ordinal with gold
};

struct AggregationResult {
  VoteConfig config;
  std::vector<SweepRecord> records;

  nlohmann::json to_json() const {
    auto opt = [](const std::optional<double>& v) -> nlohmann::json {
      return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    nlohmann::json j;
    j["seed"] = config.seed;
    j["draws"] = config.draws;
    j["tie_rule"] = std::string(to_string(config.tie_rule));
    j["enumerate_k1"] = config.enumerate_k1;
    j["records"] = nlohmann::json::array();
    for (const auto& r : records) {
      nlohmann::json e;
      e["k"] = r.k;
      e["composites"] = r.composites.size();
      e["mean_par"] = opt(r.par.mean());
      e["sd_par"] = opt(r.par.sd());
      if (!r.accuracy.empty()) {
        auto s = summary_stats(r.accuracy);
        e["mean_acc"] = s.mean;
        e["sd_acc"] = opt(s.sd);
      } else {
        e["mean_acc"] = nullptr;
        e["sd_acc"] = nullptr;
      }
      if (!r.closeness.empty()) {
        auto s = summary_stats(r.closeness);
        e["mean_closeness"] = s.mean;
        e["sd_closeness"] = opt(s.sd);
      }
      e["subsets"] = r.subsets;
      j["records"].push_back(std::move(e));
    }
    return j;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "k,composites,mean_par,sd_par,mean_acc,sd_acc,mean_closeness,sd_closeness\n";
    for (const auto& r : records) {
      os << r.k << ',' << r.composites.size() << ',' << format_optional(r.par.mean()) << ','
         << format_optional(r.par.sd());
      for (const auto* v : {&r.accuracy, &r.closeness}) {
        if (v->empty()) {
          os << ",,";
        } else {
          auto s = summary_stats(*v);
          os << ',' << format_double(s.mean) << ',' << format_optional(s.sd);
        }
      }
      os << '\n';
    }
    return os.str();
  }
};

inline SweepRecord sweep_one(const AnnotationMatrix& m, std::size_t k, const VoteConfig& cfg) {
  const std::size_t p = m.num_prompts();
  if (k == 0) throw Error("aggregation_sweep: k must be at least 1");
  if (k > p) {
    throw Error("aggregation_sweep: k=" + std::to_string(k) + " exceeds prompt count " +
                std::to_string(p));
  }
  SweepRecord rec;
  rec.k = k;
  if (k == 1 && cfg.enumerate_k1) {
    for (std::size_t i = 0; i < p; ++i) rec.subsets.push_back({i});
  } else {
    Rng rng(cfg.seed, k);
    for (std::size_t d = 0; d < cfg.draws; ++d) rec.subsets.push_back(draw_subset(p, k, rng));
  }
  if (rec.subsets.size() < 2) {
    throw Error("aggregation_sweep: at least two composites are needed for PAR statistics");
  }

  std::vector<std::string> ids;
  for (std::size_t d = 0; d < rec.subsets.size(); ++d) {
    rec.composites.push_back(composite_annotator(m, rec.subsets[d], cfg.tie_rule));
    ids.push_back("k" + std::to_string(k) + "-d" + std::to_string(d));
  }
  rec.par = par_matrix_discrete(std::move(ids), rec.composites);

  if (m.gold()) {
    for (const auto& c : rec.composites) rec.accuracy.push_back(accuracy(c, *m.gold()));
    if (m.schema().is_ordinal()) {
      const auto gold = gold_scores(m);
      for (const auto& c : rec.composites) {
        std::vector<std::optional<double>> scores(c.size());
        for (std::size_t x = 0; x < c.size(); ++x) {
          if (c[x]) scores[x] = m.schema().score(*c[x]);
        }
        rec.closeness.push_back(closeness(scores, gold, m.schema().max_distance()));
      }
    }
  }
  return rec;
}

inline AggregationResult aggregation_sweep(const AnnotationMatrix& m,
                                           std::span<const std::size_t> ks,
                                           const VoteConfig& cfg = {}) {
  if (ks.empty()) throw Error("aggregation_sweep: no k values");
  for (std::size_t k : ks) {
    if (k == 0 || k > m.num_prompts()) {
      throw Error("aggregation_sweep: k=" + std::to_string(k) + " is outside 1.." +
                  std::to_string(m.num_prompts()));
    }
  }
  AggregationResult out;
  out.config = cfg;
  for (std::size_t k : ks) out.records.push_back(sweep_one(m, k, cfg));
  return out;
}

}  // namespace ipr

#endif  // IPR_VOTING_HPP_
