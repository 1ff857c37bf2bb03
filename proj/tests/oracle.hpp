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

// Brute-force reference implementations used only by tests. They work from
// raw label grids in long double and share no code with the library metrics.

#ifndef IPR_TESTS_ORACLE_HPP_
#define IPR_TESTS_ORACLE_HPP_

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace ipr::oracle {

// -1 marks a non-valid cell.
using Grid = std::vector<std::vector<int>>;

struct Pair {
  std::optional<long double> value;
  std::size_t compared = 0;
};

inline Pair par_discrete(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<std::size_t> both;
  for (std::size_t x = 0; x < a.size(); ++x) {
    if (a[x] >= 0 && b[x] >= 0) both.push_back(x);
  }
  if (both.empty()) return {};
  long double agree = 0;
  for (std::size_t x : both) agree += (a[x] == b[x]) ? 1.0L : 0.0L;
  return {agree / both.size(), both.size()};
}

inline Pair par_graded(const std::vector<int>& a, const std::vector<int>& b,
                       const std::vector<double>& scores) {
  const long double d = static_cast<long double>(scores.back()) - scores.front();
  std::vector<std::size_t> both;
  for (std::size_t x = 0; x < a.size(); ++x) {
    if (a[x] >= 0 && b[x] >= 0) both.push_back(x);
  }
  if (both.empty()) return {};
  long double total = 0;
  for (std::size_t x : both) {
    total += 1.0L - std::fabs(static_cast<long double>(scores[a[x]]) - scores[b[x]]) / d;
  }
  return {total / both.size(), both.size()};
}

struct PanelStats {
  std::vector<std::vector<Pair>> pairs;
  std::optional<long double> mean;
  std::optional<long double> sd;
};

// Mean and sample sd over i<j via the sum-of-squares identity.
inline PanelStats panel(const Grid& g, const std::vector<double>* scores) {
  PanelStats s;
  const std::size_t p = g.size();
  s.pairs.assign(p, std::vector<Pair>(p));
  long double sum = 0, sumsq = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      s.pairs[i][j] = scores ? par_graded(g[i], g[j], *scores) : par_discrete(g[i], g[j]);
      if (i < j && s.pairs[i][j].value) {
        sum += *s.pairs[i][j].value;
        sumsq += *s.pairs[i][j].value * *s.pairs[i][j].value;
        ++n;
      }
    }
  }
  if (n >= 1) s.mean = sum / n;
  if (n >= 2) s.sd = std::sqrt(std::fmax(0.0L, (sumsq - n * *s.mean * *s.mean) / (n - 1)));
  return s;
}

inline long double accuracy(const std::vector<int>& pred, const std::vector<int>& gold) {
  long double hits = 0;
  for (std::size_t x = 0; x < gold.size(); ++x) hits += pred[x] == gold[x] ? 1 : 0;
  return hits / gold.size();
}

inline long double closeness(const std::vector<int>& pred, const std::vector<int>& gold,
                             const std::vector<double>& scores) {
  const long double d = static_cast<long double>(scores.back()) - scores.front();
  long double total = 0;
  for (std::size_t x = 0; x < gold.size(); ++x) {
    if (pred[x] < 0) continue;
    total += 1.0L - std::fabs(static_cast<long double>(scores[pred[x]]) - scores[gold[x]]) / d;
  }
  return total / gold.size();
}

}  // namespace ipr::oracle

#endif  // IPR_TESTS_ORACLE_HPP_
