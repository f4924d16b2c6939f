// Copyright (c) 2026 The fairbench Authors. All Rights Reserved
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "fairbench/balance.h"
#include "fairbench/error.h"
#include "oracles.h"

namespace fairbench {
namespace {

TEST(BalanceScore, ClosedForms) {
  EXPECT_EQ(ComputeBalanceScore({{"a", 5}, {"b", 5}, {"c", 5}, {"d", 5}}).score, 100.0);
  EXPECT_EQ(ComputeBalanceScore({{"a", 9}, {"b", 0}, {"c", 0}, {"d", 0}}).score, 0.0);
  EXPECT_NEAR(ComputeBalanceScore({{"a", 75}, {"b", 25}}).score, 81.13, 0.01);
  const double exact = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25)) / std::log(2.0) * 100;
  EXPECT_NEAR(ComputeBalanceScore({{"a", 3}, {"b", 1}}).score, exact, 1e-12);
  // Zero-count levels still count toward K.
  EXPECT_LT(ComputeBalanceScore({{"a", 5}, {"b", 5}, {"c", 0}}).score, 100.0);
}

TEST(BalanceScore, Errors) {
  try {
    ComputeBalanceScore({{"a", 3}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingleLevel);
  }
  try {
    ComputeBalanceScore({{"a", 0}, {"b", 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCounts);
  }
}

TEST(BalanceScore, PermutationAndScaleInvariant) {
  std::mt19937_64 gen(6);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::size_t> c(2 + gen() % 6);
    for (auto& x : c) x = gen() % 50;
    c[0] += 1;
    std::map<std::string, std::size_t> a, b, scaled;
    for (std::size_t i = 0; i < c.size(); ++i) {
      a["L" + std::to_string(i)] = c[i];
      b["L" + std::to_string(c.size() - 1 - i)] = c[i];
      scaled["L" + std::to_string(i)] = c[i] * 7;
    }
    const double s = ComputeBalanceScore(a).score;
    ASSERT_NEAR(s, ComputeBalanceScore(b).score, 1e-12);
    ASSERT_NEAR(s, ComputeBalanceScore(scaled).score, 1e-12);
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 100.0);
  }
}

TEST(Quotas, Examples) {
  auto eight = PlanQuotas(8);
  for (const auto& c : eight.cells) EXPECT_EQ(c.target, 1u);
  auto ten = PlanQuotas(10);
  ASSERT_EQ(ten.cells.size(), 8u);
  EXPECT_EQ(ten.cells[0].target, 2u);
  EXPECT_EQ(ten.cells[1].target, 2u);
  for (std::size_t i = 2; i < 8; ++i) EXPECT_EQ(ten.cells[i].target, 1u);
  auto one = PlanQuotas(1);
  EXPECT_EQ(one.cells[0].ethnicity, Ethnicity::kAsian);
  EXPECT_EQ(one.cells[0].gender, Gender::kFemale);
  EXPECT_EQ(one.cells[0].target, 1u);
  EXPECT_THROW(PlanQuotas(0), Error);
}

TEST(Quotas, AllTotals) {
  const auto order = PlanQuotas(8).cells;
  for (std::size_t i = 1; i < order.size(); ++i) {
    const std::string a = std::string(Name(order[i - 1].ethnicity)) + "," + std::string(Name(order[i - 1].gender));
    const std::string b = std::string(Name(order[i].ethnicity)) + "," + std::string(Name(order[i].gender));
    ASSERT_LT(a, b);
  }
  for (std::size_t total = 1; total <= 10000; ++total) {
    const auto plan = PlanQuotas(total);
    std::size_t sum = 0, lo = SIZE_MAX, hi = 0;
    for (const auto& c : plan.cells) {
      sum += c.target;
      lo = std::min(lo, c.target);
      hi = std::max(hi, c.target);
    }
    ASSERT_EQ(sum, total);
    ASSERT_LE(hi - lo, 1u);
  }
}

std::vector<FlattenCandidate> Pool(std::initializer_list<std::pair<uint64_t, int>> items) {
  std::vector<FlattenCandidate> out;
  for (auto [id, c] : items) out.push_back({id, c});
  return out;
}

TEST(GreedyFlatten, Examples) {
  // Start {Y:2, A:1, S:1}: one pick goes to Adult.
  auto pool = Pool({{1, 0}, {2, 1}, {3, 2}});
  auto plan = GreedyFlatten(pool, 1, {{0, 2}, {1, 1}, {2, 1}});
  EXPECT_EQ(plan.chosen, (std::vector<uint64_t>{2}));

  plan = GreedyFlatten(pool, 3);
  EXPECT_EQ(plan.chosen, (std::vector<uint64_t>{1, 2, 3}));

  auto young = Pool({{5, 0}, {4, 0}, {9, 0}});
  plan = GreedyFlatten(young, 2);
  EXPECT_EQ(plan.chosen, (std::vector<uint64_t>{4, 5}));
  EXPECT_THROW(GreedyFlatten(young, 4), Error);
  EXPECT_THROW(GreedyFlatten(Pool({{1, 0}, {1, 1}}), 1), Error);
}

TEST(GreedyFlatten, TraceAndFlatness) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 200; ++trial) {
    const int classes = 2 + static_cast<int>(gen() % 80);
    std::vector<FlattenCandidate> pool;
    std::map<int, std::size_t> avail;
    for (uint64_t id = 1; id <= 3000; ++id) {
      const int c = static_cast<int>(gen() % classes);
      pool.push_back({id, c});
      avail[c]++;
    }
    std::size_t min_avail = SIZE_MAX;
    for (const auto& [c, n] : avail) min_avail = std::min(min_avail, n);
    const std::size_t picks = 1 + gen() % (min_avail * avail.size());
    const auto plan = GreedyFlatten(pool, picks);
    ASSERT_EQ(plan.chosen.size(), picks);
    ASSERT_EQ(std::set<uint64_t>(plan.chosen.begin(), plan.chosen.end()).size(), picks);
    ASSERT_EQ(plan.trace.size(), picks);
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& [c, n] : plan.FinalCounts()) {
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
    if (plan.FinalCounts().size() < avail.size()) lo = 0;
    ASSERT_LE(hi - lo, 1u);
  }
}

// Greedy selections score at least as well as uniform random picks on average.
TEST(GreedyFlatten, BeatsRandomSelection) {
  std::mt19937_64 gen(21);
  double greedy = 0, random = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<FlattenCandidate> pool;
    const std::vector<double> skew = {0.6, 0.3, 0.1};
    std::discrete_distribution<int> cls(skew.begin(), skew.end());
    for (uint64_t id = 1; id <= 600; ++id) pool.push_back({id, cls(gen)});
    const std::size_t picks = 150;
    auto score = [](const std::map<int, std::size_t>& c) {
      std::map<std::string, std::size_t> m = {{"0", 0}, {"1", 0}, {"2", 0}};
      for (auto [k, v] : c) m[std::to_string(k)] = v;
      return ComputeBalanceScore(m).score;
    };
    greedy += score(GreedyFlatten(pool, picks).FinalCounts());
    std::shuffle(pool.begin(), pool.end(), gen);
    std::map<int, std::size_t> counts;
    for (std::size_t i = 0; i < picks; ++i) counts[pool[i].class_rank]++;
    random += score(counts);
  }
  EXPECT_GE(greedy, random);
}

TEST(Dedup, Examples) {
  auto set_of = [](std::vector<std::vector<double>> v) {
    EmbeddingSet s(v.front().size());
    for (std::size_t i = 0; i < v.size(); ++i) s.Insert(i + 1, testing::Unit(v[i]));
    return s;
  };
  auto r = DedupFilter(set_of({{1, 0}, {1, 0}}));
  EXPECT_EQ(r.kept, (std::vector<uint64_t>{1}));
  EXPECT_EQ(r.removed, (std::vector<uint64_t>{2}));
  r = DedupFilter(set_of({{1, 0}, {0, 1}}));
  EXPECT_EQ(r.kept.size(), 2u);

  // a.b = 0.7, b.c = 0.7, a.c = 0.2 in 3-D.
  const double ab = 0.7, ac = 0.2;
  const std::vector<double> a = {1, 0, 0};
  const std::vector<double> b = {ab, std::sqrt(1 - ab * ab), 0};
  const double c1 = ac;
  const double c2 = (0.7 - ab * c1) / b[1];
  const std::vector<double> c = {c1, c2, std::sqrt(1 - c1 * c1 - c2 * c2)};
  r = DedupFilter(set_of({a, b, c}));
  EXPECT_EQ(r.kept, (std::vector<uint64_t>{1, 3}));
  EXPECT_EQ(r.removed, (std::vector<uint64_t>{2}));

  EmbeddingSet raw(2);
  raw.Insert(1, std::vector<double>{2, 0});
  EXPECT_THROW(DedupFilter(raw), Error);
}

}  // namespace
}  // namespace fairbench
