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

#include "fairbench/balance.h"

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <set>

#include "fairbench/error.h"

namespace fairbench {

BalanceScore ComputeBalanceScore(const std::map<std::string, std::size_t>& counts,
                                 std::string attribute) {
  if (counts.size() < 2) throw Error(ErrorCode::kSingleLevel, "balance needs at least 2 levels");
  std::size_t total = 0;
  for (const auto& [level, c] : counts) total += c;
  if (total == 0) throw Error(ErrorCode::kEmptyCounts, "all class counts are zero");

  BalanceScore out;
  out.attribute = std::move(attribute);
  out.class_counts = counts;
  const std::size_t first = counts.begin()->second;
  const bool uniform = std::all_of(counts.begin(), counts.end(),
                                   [first](const auto& kv) { return kv.second == first; });
  if (uniform) {
    out.score = 100.0;
    return out;
  }
  double h = 0.0;
  for (const auto& [level, c] : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  out.score = 100.0 * h / std::log(static_cast<double>(counts.size()));
  return out;
}

std::map<std::string, std::size_t> LevelCounts(const std::vector<ImageRecord>& images,
                                               Attribute attribute) {
  std::map<std::string, std::size_t> counts;
  for (const auto& level : LevelNames(attribute)) counts[level] = 0;
  for (const auto& img : images) {
    switch (attribute) {
      case Attribute::kGender: ++counts[std::string(Name(img.gender))]; break;
      case Attribute::kAge: ++counts[std::string(Name(img.age_group))]; break;
      case Attribute::kEthnicity: ++counts[std::string(Name(img.ethnicity))]; break;
    }
  }
  return counts;
}

std::map<std::string, std::size_t> PoseClassCounts(const std::vector<ImageRecord>& images,
                                                   const PoseThresholds& thresholds) {
  auto label = [](const PoseClass& c) {
    return "P" + std::to_string(c.i) + std::to_string(c.j) + std::to_string(c.k);
  };
  std::map<std::string, std::size_t> counts;
  for (int i = 0; i < kPoseClassCount; ++i) counts[label(PoseClass::FromIndex(i))] = 0;
  for (const auto& img : images) {
    if (!img.pose) continue;
    ++counts[label(AssignPoseClass(img.pose, thresholds))];
  }
  return counts;
}

QuotaPlan PlanQuotas(std::size_t total) {
  if (total == 0) throw Error(ErrorCode::kInvalidArgument, "quota total must be >= 1");
  std::vector<QuotaCell> cells;
  for (Ethnicity e : kAllEthnicities) {
    for (Gender g : kAllGenders) cells.push_back({e, g, 0});
  }
  std::sort(cells.begin(), cells.end(), [](const QuotaCell& a, const QuotaCell& b) {
    return std::pair(Name(a.ethnicity), Name(a.gender)) <
           std::pair(Name(b.ethnicity), Name(b.gender));
  });
  const std::size_t base = total / cells.size();
  const std::size_t remainder = total % cells.size();
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i].target = base + (i < remainder ? 1 : 0);
  return QuotaPlan{std::move(cells), total};
}

std::map<int, std::size_t> SelectionPlan::FinalCounts() const {
  std::map<int, std::size_t> out;
  if (trace.empty()) return out;
  for (std::size_t c = 0; c < classes.size(); ++c) out[classes[c]] = trace.back()[c];
  return out;
}

SelectionPlan GreedyFlatten(std::span<const FlattenCandidate> candidates, std::size_t n_pick,
                            const std::map<int, std::size_t>& start_counts) {
  if (n_pick > candidates.size()) {
    throw Error(ErrorCode::kNotEnoughCandidates,
                "requested " + std::to_string(n_pick) + " of " +
                    std::to_string(candidates.size()) + " candidates");
  }
  std::map<int, std::vector<uint64_t>> pools;
  std::set<uint64_t> seen;
  for (const auto& c : candidates) {
    if (!seen.insert(c.image_id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate candidate image id");
    }
    pools[c.class_rank].push_back(c.image_id);
  }
  std::set<int> class_set;
  for (auto& [rank, ids] : pools) {
    class_set.insert(rank);
    // Lowest id is taken first; keep the pool sorted descending and pop back.
    std::sort(ids.begin(), ids.end(), std::greater<>());
  }
  for (const auto& [rank, c] : start_counts) class_set.insert(rank);

  SelectionPlan plan;
  plan.classes.assign(class_set.begin(), class_set.end());
  std::vector<std::size_t> counts(plan.classes.size(), 0);
  std::vector<std::vector<uint64_t>*> pool_of(plan.classes.size(), nullptr);
  for (std::size_t c = 0; c < plan.classes.size(); ++c) {
    auto sc = start_counts.find(plan.classes[c]);
    if (sc != start_counts.end()) counts[c] = sc->second;
    auto p = pools.find(plan.classes[c]);
    if (p != pools.end()) pool_of[c] = &p->second;
  }
  for (std::size_t t = 0; t < n_pick; ++t) {
    std::size_t best = plan.classes.size();
    for (std::size_t c = 0; c < plan.classes.size(); ++c) {
      if (pool_of[c] == nullptr || pool_of[c]->empty()) continue;
      if (best == plan.classes.size() || counts[c] < counts[best]) best = c;
    }
    plan.chosen.push_back(pool_of[best]->back());
    pool_of[best]->pop_back();
    ++counts[best];
    plan.trace.push_back(counts);
  }
  return plan;
}

DedupResult DedupFilter(const EmbeddingSet& set, double threshold) {
  if (!set.IsNormalized()) throw Error(ErrorCode::kNotNormalized, "embeddings not normalized");
  std::vector<uint64_t> ids = set.ids();
  std::sort(ids.begin(), ids.end());
  DedupResult out;
  std::vector<std::span<const double>> kept_vectors;
  for (uint64_t id : ids) {
    const auto v = set.Vector(id);
    bool duplicate = false;
    for (const auto& k : kept_vectors) {
      double dot = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * k[i];
      if (dot > threshold) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) {
      out.removed.push_back(id);
    } else {
      out.kept.push_back(id);
      kept_vectors.push_back(v);
    }
  }
  return out;
}

}  // namespace fairbench
