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

#ifndef FAIRBENCH_SYNTH_H_
#define FAIRBENCH_SYNTH_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairbench/attributes.h"
#include "fairbench/corpus.h"
#include "fairbench/pairs.h"

namespace fairbench {

enum class PoseShape { kNormal, kLaplace };

struct AxisModel {
  PoseShape shape = PoseShape::kNormal;
  double scale = 10.0;  // standard deviation (normal) or Laplace scale b, degrees
};

// Effect planted on every image (cluster spread, pose spread) or pair
// (distance shifts, mixture lifts) whose anchor image has `level` of
// `attribute`.
struct PlantedEffect {
  Attribute attribute = Attribute::kEthnicity;
  std::string level;
  double pos_shift = 0.0;   // added to positive-pair distances
  double neg_shift = 0.0;   // added to negative-pair distances
  double fpr_lift = 0.0;    // false-positive rate increase at the reference threshold
  double tpr_drop = 0.0;    // true-positive rate decrease at the reference threshold
  std::optional<double> spread;  // identity-center spread around the ethnicity center
  double pose_spread = 1.0;      // multiplier on pose scales
};

enum class PairMode {
  kHard,         // both images of a pair share gender, age and ethnicity
  kIndependent,  // the second image's attributes are drawn independently
};

struct Scenario {
  uint64_t seed = 0;
  std::size_t dim = 16;

  // Identity clusters.
  std::size_t n_identities = 0;
  std::size_t images_per_identity = 0;
  std::array<double, 2> gender_p = {0.5, 0.5};
  std::array<double, 4> ethnicity_p = {0.25, 0.25, 0.25, 0.25};
  std::array<double, 3> age_p = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  double identity_spread = 0.6;  // identity centers around their ethnicity center
  double image_spread = 0.3;     // images around their identity center
  std::array<AxisModel, 3> pose = {AxisModel{PoseShape::kNormal, 10.0},
                                   AxisModel{PoseShape::kLaplace, 15.0},
                                   AxisModel{PoseShape::kNormal, 5.0}};

  // Planted verification pairs, each on fresh identities.
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  double pos_mean = 0.8;
  double neg_mean = 1.3;
  double dist_sd = 0.15;
  PairMode pair_mode = PairMode::kHard;

  std::vector<PlantedEffect> effects;
};

// Throws kInvalidScenario.
void ValidateScenario(const Scenario& s);

struct SubgroupTruth {
  std::string attribute;
  std::string level;
  double fpr_mix = 0.0;  // share of negatives drawn from the positive distribution
  double tpr_mix = 0.0;  // share of positives drawn from the negative distribution
  double expected_tpr = 0.0;  // at reference_threshold
  double expected_fpr = 0.0;
  double spread = 0.0;
};

struct GroundTruth {
  // Accuracy-optimal threshold of the effect-free distance model.
  double reference_threshold = 0.0;
  double baseline_tpr = 0.0;
  double baseline_fpr = 0.0;
  std::vector<SubgroupTruth> subgroups;  // one per planted effect

  // Expected rates at any threshold for pairs whose anchor carries `effect`
  // (nullptr for the baseline).
  double ExpectedTpr(const Scenario& s, const PlantedEffect* effect, double threshold) const;
  double ExpectedFpr(const Scenario& s, const PlantedEffect* effect, double threshold) const;
};

struct SynthOutput {
  Corpus corpus;
  PairSet pairs;  // planted pairs, unlabeled, no distances attached
  GroundTruth truth;
};

// Deterministic per seed: every identity and planted pair draws from its own
// substream keyed by (seed, index). Embeddings are unit-norm.
SynthOutput Generate(const Scenario& scenario);

}  // namespace fairbench

#endif  // FAIRBENCH_SYNTH_H_
