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

#ifndef FAIRBENCH_PAIRS_H_
#define FAIRBENCH_PAIRS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairbench/attributes.h"
#include "fairbench/corpus.h"

namespace fairbench {

// Unordered pair of attribute levels, stored with the two names sorted so
// that Male x Female and Female x Male compare equal.
struct Combo {
  std::string lo;
  std::string hi;

  static Combo Of(std::string_view a, std::string_view b);
  bool Uniform() const { return lo == hi; }
  std::string ToString() const;  // "lo×hi"

  auto operator<=>(const Combo&) const = default;
};

struct PairAttributes {
  Combo gender;
  Combo age;
  Combo ethnicity;
  bool hard = false;  // all three attributes identical across the pair
  std::optional<double> pose_angle_deg;

  const Combo& Get(Attribute a) const;
};

struct VerificationPair {
  uint64_t image_a = 0;
  uint64_t image_b = 0;
  bool positive = false;  // same identity
  std::optional<PairAttributes> attributes;
  std::optional<double> dist;
};

struct PairSet {
  std::vector<VerificationPair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  std::size_t n_pos() const;
  std::size_t n_neg() const { return pairs.size() - n_pos(); }
  bool labeled() const;
  bool has_distances() const;
};

// Uniform sampling without replacement of n_pos within-identity pairs and
// n_neg cross-identity pairs. Positives come first, each block in draw order.
// Throws kNotEnoughPairs.
PairSet BuildRandomPairs(const Corpus& corpus, std::size_t n_pos, std::size_t n_neg,
                         uint64_t seed);

// Replaces the pairs of `base` by the hardest ones over the images it
// mentions: the n_neg closest cross-identity pairs and the n_pos most distant
// within-identity pairs, ties broken by (min id, max id). Output holds the
// positives (farthest first) followed by the negatives (closest first), with
// distances attached. Throws kNotEnoughPairs, kNotNormalized, kUnknownId.
PairSet HardenPairs(const Corpus& corpus, const PairSet& base, std::size_t threads = 1);

// Fills attribute combos, hardness and the head-pose rotation angle (when both
// images carry a pose). Throws kUnknownId and kLabelMismatch when a pair label
// contradicts the corpus identities.
PairSet LabelPairs(const Corpus& corpus, const PairSet& set);

// Fills pair distances from a normalized embedding set.
PairSet AttachDistances(const EmbeddingSet& embeddings, const PairSet& set,
                        std::size_t threads = 1);

// Seeded permutation of the pair order.
PairSet ShufflePairs(const PairSet& set, uint64_t seed);

// Throws kUnlabeledSet.
std::map<std::string, std::size_t> ComboHistogram(const PairSet& set, Attribute attribute);

// Pair CSV: header "image_a,image_b,label", label 1 for same identity.
PairSet ReadPairs(const std::string& path);
void WritePairs(const std::string& path, const PairSet& set);
std::string PairsToCsv(const PairSet& set);

}  // namespace fairbench

#endif  // FAIRBENCH_PAIRS_H_
