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

#ifndef FAIRBENCH_BALANCE_H_
#define FAIRBENCH_BALANCE_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fairbench/attributes.h"
#include "fairbench/corpus.h"
#include "fairbench/poseclass.h"

namespace fairbench {

// Normalized Shannon entropy of class proportions on a 0-100 scale:
// 100 * H(p) / ln(K), K counting zero-count levels too.
struct BalanceScore {
  std::string attribute;
  std::map<std::string, std::size_t> class_counts;
  double score = 0.0;
};

// Throws kSingleLevel (K < 2), kEmptyCounts (all counts zero).
BalanceScore ComputeBalanceScore(const std::map<std::string, std::size_t>& counts,
                                 std::string attribute = "");

// Image counts per level for gender, age and ethnicity (all levels present).
std::map<std::string, std::size_t> LevelCounts(const std::vector<ImageRecord>& images,
                                               Attribute attribute);

// Image counts per joint pose class "P<i><j><k>" (all 27 present).
std::map<std::string, std::size_t> PoseClassCounts(const std::vector<ImageRecord>& images,
                                                   const PoseThresholds& thresholds);

struct QuotaCell {
  Ethnicity ethnicity;
  Gender gender;
  std::size_t target = 0;
};

struct QuotaPlan {
  std::vector<QuotaCell> cells;  // lexicographic (ethnicity, gender) name order
  std::size_t total = 0;
};

// floor(total / 8) identities per (ethnicity, gender) cell; the remainder goes
// one each to the first cells in lexicographic order. Throws kInvalidArgument
// for total == 0.
QuotaPlan PlanQuotas(std::size_t total);

struct FlattenCandidate {
  uint64_t image_id = 0;
  // Class rank; lower ranks win ties. Age: AgeGroup enumerator. Joint
  // age x pose: age * 27 + pose index.
  int class_rank = 0;
};

struct SelectionPlan {
  std::vector<uint64_t> chosen;  // pick order
  std::vector<int> classes;      // ascending class ranks seen in candidates or start counts
  // trace[t][c] = selected count of classes[c] after pick t (start counts included).
  std::vector<std::vector<std::size_t>> trace;

  std::map<int, std::size_t> FinalCounts() const;
};

inline int JointAgePoseRank(AgeGroup age, const PoseClass& pose) {
  return static_cast<int>(age) * kPoseClassCount + pose.Index();
}

// Greedy flattening: each pick goes to the class with the smallest current
// count among classes with candidates left (ties to the lowest rank), taking
// that class's lowest image id. Throws kNotEnoughCandidates.
SelectionPlan GreedyFlatten(std::span<const FlattenCandidate> candidates, std::size_t n_pick,
                            const std::map<int, std::size_t>& start_counts = {});

struct DedupResult {
  std::vector<uint64_t> kept;
  std::vector<uint64_t> removed;
};

inline constexpr double kDefaultDedupThreshold = 0.6;

// Scans ids ascending and drops any id whose cosine similarity with an already
// kept id exceeds `threshold`. Throws kNotNormalized.
DedupResult DedupFilter(const EmbeddingSet& set, double threshold = kDefaultDedupThreshold);

}  // namespace fairbench

#endif  // FAIRBENCH_BALANCE_H_
