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

#ifndef FAIRBENCH_VERIFY_H_
#define FAIRBENCH_VERIFY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairbench/attributes.h"
#include "fairbench/corpus.h"
#include "fairbench/pairs.h"

namespace fairbench {

struct ScoredPair {
  double dist = 0.0;
  bool positive = false;
};

enum class ThresholdMode { kGlobal, kKFold };

struct ThresholdSpec {
  ThresholdMode mode = ThresholdMode::kGlobal;
  std::size_t k = 10;  // folds, kfold mode only
};

struct FoldResult {
  double threshold = 0.0;
  double accuracy = 0.0;
  std::size_t n_test = 0;
};

struct ThresholdResult {
  double threshold = 0.0;
  ThresholdMode mode = ThresholdMode::kGlobal;
  double accuracy = 0.0;
  std::vector<FoldResult> per_fold;  // kfold only
};

// Prediction rule: same identity iff dist <= threshold.
//
// Global mode scans the candidates {min - 1, midpoints of consecutive unique
// distances, max + 1} and keeps the smallest threshold of maximal accuracy.
// K-fold mode splits the input order into k contiguous folds (sizes differ by
// at most one), selects a global threshold on the other k - 1 folds, and
// reports the mean held-out accuracy and the mean fold threshold.
//
// Throws kSingleClassInput (also when a kfold training split is one-class)
// and kInvalidArgument (empty input, k < 2 or k > n).
ThresholdResult SelectThreshold(std::span<const ScoredPair> pairs, const ThresholdSpec& spec);
ThresholdResult SelectThreshold(const PairSet& pairs, const ThresholdSpec& spec);

std::vector<ScoredPair> ToScored(const PairSet& pairs);

enum class Conditioning {
  kLevel,  // pairs whose two images share the level; mixed pairs are skipped
  kCombo,  // unordered combination of the two levels
};

enum class Restrict { kAll, kHard, kSoft };

enum class MetricName { kAccuracy, kTpr, kFpr, kTnr };

std::string_view Name(Conditioning c);
std::string_view Name(Restrict r);
std::string_view Name(MetricName m);
std::optional<Restrict> ParseRestrict(std::string_view s);
std::optional<MetricName> ParseMetricName(std::string_view s);

// Empirical per-slice metrics. An unset optional marks a metric whose
// conditioning slice is empty (e.g. fpr of a positives-only subgroup).
struct SubgroupMetrics {
  std::string key;
  std::size_t n = 0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t true_pos = 0;
  std::size_t false_pos = 0;
  std::size_t correct = 0;
  std::optional<double> accuracy;
  std::optional<double> tpr;
  std::optional<double> fpr;
  std::optional<double> tnr;

  std::optional<double> Get(MetricName m) const;
  // Number of pairs the metric is estimated on.
  std::size_t Support(MetricName m) const;
};

// Requires a labeled pair set with distances (kUnlabeledSet,
// kInvalidArgument). Level conditioning lists every level of the attribute in
// canonical order, empty ones included; combo conditioning lists the observed
// combos in lexicographic order.
std::vector<SubgroupMetrics> ComputeSubgroupMetrics(const PairSet& pairs, double threshold,
                                                    Attribute attribute,
                                                    Conditioning conditioning,
                                                    Restrict restrict);

// Restricts a labeled set to hard or soft pairs.
PairSet FilterPairs(const PairSet& pairs, Restrict restrict);

// values[i][j] = metric(level_i) - metric(level_j). standard_errors[i][j] is
// the binomial standard error of that difference.
struct GapMatrix {
  std::string attribute;
  MetricName metric = MetricName::kTnr;
  std::vector<std::string> levels;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> standard_errors;
  std::vector<std::string> excluded;  // subgroups with an undefined metric

  // Largest |value| / standard_error over off-diagonal entries; entries with a
  // zero standard error count only when their value is non-zero (as infinity).
  double MaxAbsZ() const;
  bool WithinNoise(double bound) const { return MaxAbsZ() <= bound; }
};

// Throws kTooFewSubgroups when fewer than two subgroups have the metric defined.
GapMatrix ComputeGapMatrix(std::span<const SubgroupMetrics> metrics, MetricName metric,
                           std::string attribute);

struct DispersionSummary {
  double mean = 0.0;
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
};

struct DispersionGroup {
  std::string level;
  std::vector<uint64_t> image_ids;  // one sampled image per identity
  std::vector<double> distances;    // to the group centroid, same order
  DispersionSummary summary;
};

// Samples one image per identity (seeded per identity), groups the sampled
// images by `attribute`, and measures Euclidean distances to each group's
// arithmetic-mean centroid. Every level of the attribute must be represented
// (kEmptyGroup). Throws kNotNormalized.
std::vector<DispersionGroup> CentroidDispersion(const Corpus& corpus, Attribute attribute,
                                                uint64_t seed);

}  // namespace fairbench

#endif  // FAIRBENCH_VERIFY_H_
