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

#ifndef FAIRBENCH_POSECLASS_H_
#define FAIRBENCH_POSECLASS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fairbench/attributes.h"
#include "fairbench/corpus.h"

namespace fairbench {

enum class Axis { kPitch, kYaw, kRoll };

std::string_view Name(Axis axis);

inline constexpr double kNeutralFraction = 0.68;
inline constexpr double kTailQuantile = (1.0 - kNeutralFraction) / 2.0;  // 0.16

// Per-axis split into low (< t_lo), neutral ([t_lo, t_hi]) and high (> t_hi).
struct AxisThresholds {
  Axis axis = Axis::kPitch;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t n = 0;
  // Fractions of the fitting samples in each class.
  double low = 0.0;
  double neutral = 0.0;
  double high = 0.0;

  // 1 = low, 2 = neutral, 3 = high.
  int Classify(double angle) const;
};

// Fits thresholds so that the neutral class holds 68% of the samples and the
// two tails are equally populated. Thresholds start from the linear
// interpolation quantiles at 0.16 and 0.84 and are moved onto the nearest
// order statistic only when that quantile would put a different number than
// round(0.16 n) samples in its tail.
// Throws kTooFewSamples (< 10), kNonFiniteInput.
AxisThresholds FitAxisThresholds(std::span<const double> samples, Axis axis = Axis::kPitch);

using PoseThresholds = std::array<AxisThresholds, 3>;

// Fits all three axes on the images that carry a pose.
PoseThresholds FitPoseThresholds(const std::vector<ImageRecord>& images);

// Cell of the 3 x 3 x 3 pose grid; i, j, k are the pitch, yaw and roll classes.
struct PoseClass {
  int i = 2;
  int j = 2;
  int k = 2;

  int Index() const { return (i - 1) * 9 + (j - 1) * 3 + (k - 1); }
  static PoseClass FromIndex(int index);

  bool operator==(const PoseClass&) const = default;
};

inline constexpr int kPoseClassCount = 27;

// Throws kMissingPose.
PoseClass AssignPoseClass(const std::optional<Pose>& pose, const PoseThresholds& thresholds);

struct PoseCandidate {
  uint64_t image_id = 0;
  PoseClass pose_class;
};

// Round-robin over the 27 classes in index order, drawing uniformly without
// replacement inside each class; exhausted classes are skipped. Returns image
// ids in selection order. Throws kNotEnoughCandidates.
std::vector<uint64_t> EvenSample(std::span<const PoseCandidate> candidates, std::size_t total,
                                 uint64_t seed);

}  // namespace fairbench

#endif  // FAIRBENCH_POSECLASS_H_
