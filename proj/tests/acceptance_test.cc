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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ipr/cli.hpp"
#include "ipr/ipr.hpp"
#include "ipr/mock_backend.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

namespace {

using namespace ipr;
using ipr::testing::TempDir;
using Clock = std::chrono::steady_clock;

constexpr double kTol = 1e-12;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure; later checks still run so the detail is useful.
class Check {
 public:
  void expect(bool cond, const std::string& what) {
    if (!cond && out_.pass) {
      out_.pass = false;
      out_.detail = what;
    }
  }
  void near(double got, long double want, double tol, const std::string& what) {
    if (!(std::fabs(got - static_cast<double>(want)) <= tol)) {
      std::ostringstream os;
      os.precision(17);
      os << what << ": got " << got << ", want " << static_cast<double>(want);
      expect(false, os.str());
    }
  }
  void note(const std::string& s) {
    if (out_.pass) out_.detail = s;
  }
  Outcome result() const { return out_; }

 private:
  Outcome out_;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

Outcome ac1_oracle_equivalence() {
  Check c;
  std::mt19937_64 gen(20260101);
  const auto t0 = Clock::now();
  std::size_t compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = 1 + gen() % 10;
    const std::size_t n = 1 + gen() % 50;
    const std::size_t l = 2 + gen() % 5;
    const bool ordinal = trial % 2 == 0;
    const double invalid_rate = std::uniform_real_distribution<double>(0.0, 0.4)(gen);
    const auto schema = ipr::testing::letters_schema(l, ordinal);
    const auto grid = ipr::testing::random_grid(gen, p, n, l, invalid_rate);
    std::vector<std::size_t> gold(n);
    std::vector<int> gold_int(n);
    for (std::size_t x = 0; x < n; ++x) {
      gold[x] = gen() % l;
      gold_int[x] = static_cast<int>(gold[x]);
    }
    const auto m = ipr::testing::matrix_from_grid(schema, grid, gold);
    const std::string tag = "trial " + std::to_string(trial);

    for (auto mode : {ParMode::kDiscrete, ParMode::kGraded}) {
      if (mode == ParMode::kGraded && !ordinal) continue;
      const auto pm = par_matrix(m, mode);
      const auto ref = oracle::panel(grid, mode == ParMode::kGraded ? &schema.scores() : nullptr);
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
          const auto& want = ref.pairs[i][j];
          c.expect(pm.value(i, j).has_value() == want.value.has_value(), tag + ": definedness");
          if (want.value && pm.value(i, j)) c.near(*pm.value(i, j), *want.value, kTol, tag + ": pair");
          c.expect(pm.coverage(i, j) == want.compared, tag + ": coverage");
          ++compared;
        }
      }
      c.expect(pm.mean().has_value() == ref.mean.has_value(), tag + ": mean definedness");
      if (ref.mean && pm.mean()) c.near(*pm.mean(), *ref.mean, kTol, tag + ": mean");
      c.expect(pm.sd().has_value() == ref.sd.has_value(), tag + ": sd definedness");
      if (ref.sd && pm.sd()) c.near(*pm.sd(), *ref.sd, kTol, tag + ": sd");
    }
    const auto acc = per_prompt_accuracy(m);
    for (std::size_t i = 0; i < p; ++i) {
      c.near(acc[i], oracle::accuracy(grid[i], gold_int), kTol, tag + ": accuracy");
    }
    if (ordinal) {
      const auto clo = per_prompt_closeness(m);
      for (std::size_t i = 0; i < p; ++i) {
        c.near(clo[i], oracle::closeness(grid[i], gold_int, schema.scores()), kTol,
               tag + ": closeness");
      }
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 5.0, "runtime " + fmt(secs, 2) + " s >= 5 s");
  c.note("100 matrices, " + std::to_string(compared) + " pair cells, " + fmt(secs, 3) + " s");
  return c.result();
}

Outcome ac2_formula_fixtures() {
  Check c;
  const auto cat = build_schema("ab", {"A", "B"}, SchemaKind::kCategorical);
  const std::vector<Label> a{0, 1, 0};
  const std::vector<Label> b{0, 1, 1};
  c.near(*par_discrete(a, b).value, 2.0L / 3.0L, kTol, "PAR([A,B,A],[A,B,B])");

  const std::vector<std::optional<double>> s1{5.0, 0.0};
  const std::vector<std::optional<double>> s2{4.0, 0.0};
  c.near(*par_graded(s1, s2, 5.0).value, 0.9L, kTol, "graded PAR([5,0],[4,0],D=5)");

  // Three prompts whose pair PARs are 1.0, 0.5, 0.5.
  const auto m = ipr::testing::matrix_from_grid(cat, {{0, 0}, {0, 0}, {0, 1}});
  const auto pm = par_matrix(m, ParMode::kDiscrete);
  c.near(*pm.value(0, 1), 1.0L, kTol, "pair (0,1)");
  c.near(*pm.value(0, 2), 0.5L, kTol, "pair (0,2)");
  c.near(*pm.value(1, 2), 0.5L, kTol, "pair (1,2)");
  c.near(*pm.sd(), std::sqrt(1.0L / 12.0L), kTol, "sigma_PAR({1,0.5,0.5})");
  c.near(*pm.mean(), 2.0L / 3.0L, kTol, "mu_PAR({1,0.5,0.5})");
  c.note("2/3, 0.9, " + fmt(*pm.sd(), 12));
  return c.result();
}

Outcome ac3_degeneration() {
  Check c;
  std::mt19937_64 gen(99);
  std::size_t cells = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t l = 2 + gen() % 5;
    const std::size_t p = 2 + gen() % 9;
    const std::size_t n = 1 + gen() % 50;
    const auto schema = ipr::testing::letters_schema(l, true);
    oracle::Grid g(p, std::vector<int>(n));
    std::bernoulli_distribution invalid(0.1);
    for (auto& row : g) {
      for (auto& v : row) v = invalid(gen) ? -1 : (gen() % 2 ? static_cast<int>(l - 1) : 0);
    }
    const auto m = ipr::testing::matrix_from_grid(schema, g);
    const auto d = par_matrix(m, ParMode::kDiscrete);
    const auto gr = par_matrix(m, ParMode::kGraded);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        c.expect(d.value(i, j) == gr.value(i, j), "trial " + std::to_string(trial) + ": cell differs");
        ++cells;
      }
    }
    c.expect(d.mean() == gr.mean() && d.sd() == gr.sd(), "summary differs");
  }
  c.note("50 matrices, " + std::to_string(cells) + " cells bit-identical");
  return c.result();
}

AnnotationMatrix panel(NoiseMode mode, double flip, std::size_t n, std::size_t count,
                       std::uint64_t seed) {
  const auto schema = trec6_schema();
  const auto gold = uniform_gold(n, schema.size(), seed + 1);
  std::vector<AnnotatorModel> models;
  for (std::size_t i = 0; i < count; ++i) {
    AnnotatorModel a;
    a.flip_rate = flip;
    a.seed = seed;
    if (mode == NoiseMode::kSystematic) a.bias_target = *schema.find("Entity");
    models.push_back(a);
  }
  return synth_panel(schema, gold, models);
}

double mean_of(const std::vector<double>& v) { return summary_stats(v).mean; }

Outcome ac4_voting_trend() {
  Check c;
  const auto t0 = Clock::now();
  const auto m = panel(NoiseMode::kStochastic, 0.3, 500, 20, 42);
  VoteConfig cfg;
  cfg.draws = 50;
  cfg.seed = 42;
  const std::vector<std::size_t> ks{1, 3, 5, 10};
  const auto r = aggregation_sweep(m, ks, cfg);
  std::vector<double> sd;
  std::vector<double> acc;
  for (const auto& rec : r.records) {
    sd.push_back(rec.par.sd().value_or(NAN));
    acc.push_back(mean_of(rec.accuracy));
  }
  for (std::size_t i = 1; i < sd.size(); ++i) {
    c.expect(sd[i] < sd[i - 1], "sigma_PAR not strictly decreasing at k=" + std::to_string(ks[i]));
  }
  c.expect(sd[3] <= 0.2 * sd[0], "sigma(10)/sigma(1) = " + fmt(sd[3] / sd[0]) + " > 0.2");
  c.expect(acc[3] > acc[0], "accuracy did not improve");
  const double secs = seconds_since(t0);
  c.expect(secs < 30.0, "runtime " + fmt(secs, 2) + " s >= 30 s");
  c.note("sigma " + fmt(sd[0]) + " > " + fmt(sd[1]) + " > " + fmt(sd[2]) + " > " + fmt(sd[3]) +
         " (ratio " + fmt(sd[3] / sd[0]) + "), acc " + fmt(acc[0]) + " -> " + fmt(acc[3]) + ", " +
         fmt(secs, 2) + " s");
  return c.result();
}

Outcome ac5_stubborn_consistency() {
  Check c;
  const double flip = 0.99;
  const auto m = panel(NoiseMode::kSystematic, flip, 500, 20, 42);
  const auto pm = par_matrix(m, ParMode::kDiscrete);
  const double mu = *pm.mean();
  const double acc = mean_of(per_prompt_accuracy(m));
  VoteConfig cfg;
  const std::vector<std::size_t> ks{1, 10};
  const auto r = aggregation_sweep(m, ks, cfg);
  const double a1 = mean_of(r.records[0].accuracy);
  const double a10 = mean_of(r.records[1].accuracy);
  c.expect(mu >= 0.95, "mu_PAR " + fmt(mu) + " < 0.95");
  c.expect(acc <= 1.0 - flip + 0.05, "mean accuracy " + fmt(acc) + " > " + fmt(1.0 - flip + 0.05));
  c.expect(std::fabs(a10 - a1) <= 0.02, "accuracy moved " + fmt(a10 - a1) + " between k=1 and k=10");
  c.note("flip " + fmt(flip, 2) + ": mu_PAR " + fmt(mu) + ", accuracy " + fmt(acc) + ", k=1 " +
         fmt(a1) + " vs k=10 " + fmt(a10));
  return c.result();
}

Outcome ac6_closed_form() {
  Check c;
  const std::size_t n = 5000;
  const std::size_t count = 20;
  const auto m = panel(NoiseMode::kStochastic, 0.3, n, count, 7);
  const double expected = expected_pairwise_agreement(0.3, 6, NoiseMode::kStochastic);
  c.near(expected, 0.508L, 1e-12, "closed form");
  const double mu = *par_matrix(m, ParMode::kDiscrete).mean();

  // Standard error from per-sample agreement fractions; the samples are independent.
  std::vector<double> frac(n);
  const double pairs = count * (count - 1) / 2.0;
  std::vector<std::vector<Label>> rows;
  for (std::size_t i = 0; i < count; ++i) rows.push_back(m.row(i));
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t agree = 0;
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = i + 1; j < count; ++j) agree += rows[i][x] == rows[j][x];
    }
    frac[x] = agree / pairs;
  }
  const auto s = summary_stats(frac);
  c.near(s.mean, mu, 1e-12, "per-sample mean vs mu_PAR");
  const double se = *s.sd / std::sqrt(static_cast<double>(n));
  const double z = (mu - expected) / se;
  c.expect(std::fabs(z) <= 3.0, "z = " + fmt(z, 2));
  c.note("mu_PAR " + fmt(mu, 5) + " vs " + fmt(expected, 3) + ", SE " + fmt(se, 5) + ", z " + fmt(z, 2));
  return c.result();
}

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(std::move(args), out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

Outcome ac7_pipeline_determinism() {
  Check c;
  const std::string data = IPR_DATA_DIR;
  MockChatServer server(hashed_label_responder(trec6_schema()));
  server.start();
  TempDir a("acc-a");
  TempDir b("acc-b");

  const std::vector<std::string> outputs{"m.jsonl",       "par.csv",   "par.json",
                                         "par.svg",       "sweep.csv", "sweep.json"};
  auto pipeline = [&](const TempDir& dir, const std::string& tag) {
    const std::string mat = dir.file("m" + tag + ".jsonl");
    c.expect(cli({"annotate", "--corpus", data + "/corpus/trec6_reference.jsonl", "--dataset",
                  data + "/datasets/trec6_demo.jsonl", "--schema", "trec6", "--model", "mock",
                  "--api-key-env", "", "--backend-url", server.base_url(), "--cache",
                  dir.file("cache.jsonl"), "--out", mat}) == 0,
             "annotate failed");
    c.expect(cli({"par", "--matrix", mat, "--out", dir.file("par" + tag)}) == 0, "par failed");
    c.expect(cli({"sweep", "--matrix", mat, "--k", "1", "2", "3", "--draws", "20", "--out",
                  dir.file("sweep" + tag)}) == 0,
             "sweep failed");
  };
  auto bytes = [&](const TempDir& dir, const std::string& tag, const std::string& name) {
    const auto dot = name.find('.');
    return read_file(dir.file(name.substr(0, dot) + tag + name.substr(dot)));
  };

  pipeline(a, "");
  const std::size_t after_a = server.request_count();
  pipeline(b, "");
  const std::size_t after_b = server.request_count();
  pipeline(a, "-warm");
  const std::size_t warm_requests = server.request_count() - after_b;

  c.expect(after_a > 0 && after_b - after_a == after_a, "fresh runs made different request counts");
  c.expect(warm_requests == 0, "warm rerun made " + std::to_string(warm_requests) + " requests");
  for (const auto& name : outputs) {
    const auto ref = bytes(a, "", name);
    c.expect(!ref.empty(), name + " is empty");
    c.expect(ref == bytes(b, "", name), name + " differs between fresh runs");
    c.expect(ref == bytes(a, "-warm", name), name + " differs on warm rerun");
  }
  c.note(std::to_string(outputs.size()) + " outputs identical; fresh runs " +
         std::to_string(after_a) + " requests each, warm rerun 0");
  return c.result();
}

Outcome ac8_round_trips() {
  Check c;
  const std::string data = IPR_DATA_DIR;
  TempDir dir("acc-rt");
  std::size_t checked = 0;

  for (const std::string name : {"trec6", "politifact6"}) {
    const auto corpus = load_corpus(data + "/corpus/" + name + "_reference.jsonl");
    save_corpus(dir.file("c.jsonl"), corpus.prompts);
    c.expect(load_corpus(dir.file("c.jsonl")).prompts == corpus.prompts, name + " corpus");
    ++checked;
  }
  {
    std::vector<PromptSpec> odd{{"x", PromptStyle::kContextual, "d",
                                 "Tab\there, \"quotes\", ünïcode\n\n{{sample}}\n"}};
    c.expect(parse_corpus(serialize_corpus(odd)).prompts == odd, "corpus with escapes");
    ++checked;
  }
  const auto schema = trec6_schema();
  const auto ds = load_dataset(data + "/datasets/trec6_demo.jsonl", schema);
  save_dataset(dir.file("d.jsonl"), ds.samples, schema);
  const auto ds2 = load_dataset(dir.file("d.jsonl"), schema);
  c.expect(ds2.samples == ds.samples && ds2.class_counts == ds.class_counts, "dataset");
  ++checked;

  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const bool ordinal = trial % 2 == 1;
    const auto s = ordinal ? politifact6_schema() : trec6_schema();
    const std::size_t p = 1 + gen() % 6;
    const std::size_t n = 1 + gen() % 30;
    const auto g = ipr::testing::random_grid(gen, p, n, s.size(), 0.2);
    std::vector<std::size_t> gold(n);
    for (auto& v : gold) v = gen() % s.size();
    auto m = ipr::testing::matrix_from_grid(s, g, trial % 3 ? std::optional(gold) : std::nullopt);
    if (n > 1 && s.extra_labels().size() > 0) {
      m.set_cell(0, 1, Cell{s.normalize("no verdict"), CellStatus::kOk, "No verdict.", "fp"});
    }
    m.set_cell(p - 1, 0, Cell{ParsedLabel::invalid(), CellStatus::kFailed, "", "fp2"});
    const std::string text = serialize_matrix(m);
    const auto back = parse_matrix(text);
    c.expect(back == m, "matrix trial " + std::to_string(trial));
    c.expect(serialize_matrix(back) == text, "matrix bytes trial " + std::to_string(trial));
    ++checked;

    for (auto mode : {ParMode::kDiscrete, ParMode::kGraded}) {
      if (mode == ParMode::kGraded && !ordinal) continue;
      const auto pm = par_matrix(m, mode);
      const auto csv = parse_par_csv(pm.to_csv());
      c.expect(csv.ids == pm.ids(), "PAR CSV ids");
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
          c.expect(csv.values[i][j] == pm.value(i, j), "PAR CSV value differs");
        }
      }
      ++checked;
    }
  }
  c.note(std::to_string(checked) + " round-trips exact");
  return c.result();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 metric oracle equivalence", ac1_oracle_equivalence},
      {"AC2 formula fixtures", ac2_formula_fixtures},
      {"AC3 graded/discrete degeneration", ac3_degeneration},
      {"AC4 voting trend on stochastic panel", ac4_voting_trend},
      {"AC5 stubborn consistency", ac5_stubborn_consistency},
      {"AC6 closed-form agreement", ac6_closed_form},
      {"AC7 pipeline determinism", ac7_pipeline_determinism},
      {"AC8 round-trips", ac8_round_trips},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
