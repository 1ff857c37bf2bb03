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

#include "ipr/corpus_io.hpp"

#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "ipr/metrics.hpp"
#include "ipr/synthetic.hpp"
#include "test_util.hpp"

namespace ipr {
namespace {

using testing::TempDir;

std::vector<PromptSpec> twenty_prompt_corpus() {
  std::vector<PromptSpec> out;
  for (int i = 0; i < 10; ++i) {
    out.push_back({"an-" + std::to_string(i), PromptStyle::kAnalytical, "trec6",
                   "Analytical variant " + std::to_string(i) + ": classify.\n\n{{sample}}"});
    out.push_back({"ctx-" + std::to_string(i), PromptStyle::kContextual, "trec6",
                   "Contextual variant " + std::to_string(i) + ", what kind?\n\n{{sample}}"});
  }
  return out;
}

TEST(Corpus, TwentyPromptsTenPerStyle) {
  TempDir dir("corpus");
  const auto prompts = twenty_prompt_corpus();
  save_corpus(dir.file("c.jsonl"), prompts);
  const auto c = load_corpus(dir.file("c.jsonl"));
  EXPECT_EQ(c.prompts, prompts);
  const auto counts = c.count_by_style();
  EXPECT_EQ(counts.at("analytical"), 10);
  EXPECT_EQ(counts.at("contextual"), 10);
  EXPECT_TRUE(c.warnings.empty());
}

TEST(Corpus, ShippedReferenceFixtures) {
  for (std::string ds : {"trec6", "politifact6"}) {
    const auto c = load_corpus(IPR_DATA_DIR "/corpus/" + ds + "_reference.jsonl");
    EXPECT_EQ(c.prompts, reference_prompts(ds));
    EXPECT_EQ(c.prompts.size(), 3);
    for (const auto& p : c.prompts) EXPECT_EQ(count_placeholders(p.template_text), 1);
  }
}

TEST(Corpus, SinglePromptWarns) {
  const auto c = parse_corpus(R"({"id":"a","style":"standard","dataset":"trec6","template":"Q: {{sample}}"})");
  ASSERT_EQ(c.warnings.size(), 1);
  EXPECT_NE(c.warnings[0].find("undefined"), std::string::npos);
}

TEST(Corpus, Errors) {
  const std::string dup =
      R"({"id":"a","style":"standard","dataset":"trec6","template":"{{sample}}"})" "\n"
      R"({"id":"a","style":"analytical","dataset":"trec6","template":"x {{sample}}"})";
  EXPECT_THROW(parse_corpus(dup), Error);
  // Same id on another dataset is fine.
  const std::string other =
      R"({"id":"a","style":"standard","dataset":"trec6","template":"{{sample}}"})" "\n"
      R"({"id":"a","style":"standard","dataset":"politifact6","template":"{{sample}}"})";
  EXPECT_EQ(parse_corpus(other).prompts.size(), 2);
  EXPECT_THROW(parse_corpus(R"({"id":"a","style":"casual","dataset":"d","template":"{{sample}}"})"), Error);
  EXPECT_THROW(parse_corpus(R"({"id":"a","style":"standard","dataset":"d","template":"none"})"), Error);
  EXPECT_THROW(parse_corpus(R"({"id":"a","style":"standard","dataset":"d","template":"{{sample}} {{sample}}"})"), Error);
  EXPECT_THROW(parse_corpus(R"({"id":"a"})"), Error);
  EXPECT_THROW(parse_corpus("not json"), Error);
  EXPECT_THROW(parse_corpus(""), Error);
}

std::vector<DatasetSample> balanced_samples(const LabelSchema& s, std::size_t per_class) {
  std::vector<DatasetSample> out;
  for (std::size_t i = 0; i < per_class * s.size(); ++i) {
    out.push_back({"s" + std::to_string(i), "statement number " + std::to_string(i) + "\nwith a newline",
                   i % s.size()});
  }
  return out;
}

TEST(Dataset, PolitifactShapedFile) {
  TempDir dir("ds");
  const auto s = politifact6_schema();
  const auto samples = balanced_samples(s, 200);
  save_dataset(dir.file("p.jsonl"), samples, s);
  const auto d = load_dataset(dir.file("p.jsonl"), s);
  EXPECT_EQ(d.samples.size(), 1200);
  EXPECT_EQ(d.samples, samples);
  for (auto c : d.class_counts) EXPECT_EQ(c, 200);
}

TEST(Dataset, TrecShapedFile) {
  const auto s = trec6_schema();
  std::string text;
  std::mt19937 gen(1);
  for (int i = 0; i < 500; ++i) {
    text += nlohmann::json{{"sample_id", std::to_string(i)}, {"text", "q?"}, {"gold", s.labels()[gen() % 6]}}.dump() + "\n";
  }
  const auto d = parse_dataset(text, s);
  EXPECT_EQ(d.samples.size(), 500);
  std::size_t total = 0;
  for (auto c : d.class_counts) total += c;
  EXPECT_EQ(total, 500);
}

TEST(Dataset, Errors) {
  const auto s = politifact6_schema();
  EXPECT_THROW(parse_dataset(R"({"sample_id":"1","text":"x","gold":"NO VERDICT"})", s), Error);
  EXPECT_THROW(parse_dataset(R"({"sample_id":"1","text":"x","gold":"SORT OF TRUE"})", s), Error);
  EXPECT_THROW(parse_dataset("", s), Error);
  EXPECT_THROW(parse_dataset(R"({"sample_id":"1","text":"x","gold":"TRUE"})" "\n"
                             R"({"sample_id":"1","text":"y","gold":"TRUE"})", s),
               Error);
  // Gold labels are matched canonically.
  EXPECT_EQ(parse_dataset(R"({"sample_id":"1","text":"x","gold":"half-true"})", s).samples[0].gold, 3);
}

AnnotationMatrix provenance_matrix() {
  const auto s = politifact6_schema();
  AnnotationMatrix m(s, {{"p0", "analytical"}, {"p1", "contextual"}}, {"a", "b", "c"},
                     std::vector<std::size_t>{0, 5, 3});
  m.dataset_name = "politifact6";
  m.model = "mock-1";
  const std::vector<std::string> raw{"TRUE", "No verdict", "???", "pants on fire", "Mostly-true", ""};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    Cell c{s.normalize(raw[i]), CellStatus::kOk, raw[i], "fp" + std::to_string(i)};
    if (i == 5) c.status = CellStatus::kFailed;
    m.set_cell(i / 3, i % 3, c);
  }
  return m;
}

TEST(Matrix, RoundTripKeepsInvalidFailedAndProvenance) {
  TempDir dir("matrix");
  const auto m = provenance_matrix();
  save_matrix(dir.file("m.jsonl"), m);
  const auto back = load_matrix(dir.file("m.jsonl"));
  EXPECT_EQ(back, m);
  EXPECT_EQ(back.count_failed(), 1);
  EXPECT_EQ(back.count_extra(), 1);
  EXPECT_EQ(back.cell(1, 2).status, CellStatus::kFailed);
  EXPECT_EQ(back.cell(0, 1).parsed.outcome, ParsedLabel::Outcome::kExtra);
  EXPECT_EQ(back.cell(1, 1).fingerprint, "fp4");
  EXPECT_EQ(serialize_matrix(back), serialize_matrix(m));
}

TEST(Matrix, RoundTripRandomPanelsPreservesMetrics) {
  std::mt19937_64 gen(8);
  for (int t = 0; t < 10; ++t) {
    const auto grid = testing::random_grid(gen, 2 + gen() % 6, 1 + gen() % 30, 6, 0.2);
    const auto gold = uniform_gold(grid[0].size(), 6, t);
    const auto m = testing::matrix_from_grid(politifact6_schema(), grid, gold);
    const auto back = parse_matrix(serialize_matrix(m));
    ASSERT_EQ(back, m);
    const auto a = par_matrix(m, ParMode::kGraded);
    const auto b = par_matrix(back, ParMode::kGraded);
    EXPECT_EQ(a.to_csv(), b.to_csv());
    EXPECT_EQ(a.mean(), b.mean());
    EXPECT_EQ(a.sd(), b.sd());
    EXPECT_EQ(per_prompt_closeness(m), per_prompt_closeness(back));
  }
}

TEST(Matrix, LoadErrors) {
  const std::string good = serialize_matrix(provenance_matrix());
  // Truncated: drop the end record.
  const auto cut = good.substr(0, good.rfind("{\"cells\""));
  EXPECT_THROW(parse_matrix(cut), Error);
  // Truncated mid-cells.
  std::string half = good.substr(0, good.find('\n', good.find("\"p\":1")) + 1);
  EXPECT_THROW(parse_matrix(half), Error);
  // Out-of-range label index.
  std::string edited = good;
  const auto pos = edited.find("\"label\":5");
  ASSERT_NE(pos, std::string::npos);
  edited.replace(pos, 9, "\"label\":99");
  EXPECT_THROW(parse_matrix(edited), Error);
  // Version mismatch.
  std::string v2 = good;
  v2.replace(v2.find("\"version\":1"), 11, "\"version\":2");
  EXPECT_THROW(parse_matrix(v2), Error);
  EXPECT_THROW(parse_matrix(""), Error);
  EXPECT_THROW(parse_matrix("{\"format\":\"other\"}"), Error);
}

}  // namespace
}  // namespace ipr
