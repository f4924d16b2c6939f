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

#include "fairbench/poseclass.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairbench/error.h"
#include "fairbench/quantile.h"
#include "fairbench/random.h"

namespace fairbench {

std::string_view Name(Axis axis) {
  switch (axis) {
    case Axis::kPitch: return "pitch";
    case Axis::kYaw: return "yaw";
    case Axis::kRoll: return "roll";
  }
  return "";
}

int AxisThresholds::Classify(double angle) const {
  if (angle < t_lo) return 1;
  if (angle > t_hi) return 3;
  return 2;
}

AxisThresholds FitAxisThresholds(std::span<const double> samples, Axis axis) {
  if (samples.size() < 10) {
    throw Error(ErrorCode::kTooFewSamples,
                "need at least 10 samples, got " + std::to_string(samples.size()));
  }
  for (double x : samples) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNonFiniteInput, "non-finite angle");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const auto tail = static_cast<std::size_t>(std::lround(kTailQuantile * static_cast<double>(n)));

  AxisThresholds t;
  t.axis = axis;
  t.n = n;
  t.t_lo = LinearQuantile(sorted, kTailQuantile);
  t.t_hi = LinearQuantile(sorted, 1.0 - kTailQuantile);
  // Exactly `tail` samples lie strictly below t_lo when t_lo is in
  // (x[tail-1], x[tail]]; symmetrically above t_hi.
  if (tail > 0 && t.t_lo <= sorted[tail - 1]) t.t_lo = sorted[tail];
  if (t.t_lo > sorted[tail]) t.t_lo = sorted[tail];
  const std::size_t top = n - 1 - tail;
  if (tail > 0 && t.t_hi >= sorted[top + 1]) t.t_hi = sorted[top];
  if (t.t_hi < sorted[top]) t.t_hi = sorted[top];

  std::size_t low = 0, high = 0;
  for (double x : sorted) {
    low += x < t.t_lo ? 1 : 0;
    high += x > t.t_hi ? 1 : 0;
  }
  const double dn = static_cast<double>(n);
  t.low = static_cast<double>(low) / dn;
  t.high = static_cast<double>(high) / dn;
  t.neutral = static_cast<double>(n - low - high) / dn;
  return t;
}

PoseThresholds FitPoseThresholds(const std::vector<ImageRecord>& images) {
  std::array<std::vector<double>, 3> angles;
  for (const auto& img : images) {
    if (!img.pose) continue;
    angles[0].push_back(img.pose->pitch);
    angles[1].push_back(img.pose->yaw);
    angles[2].push_back(img.pose->roll);
  }
  return {FitAxisThresholds(angles[0], Axis::kPitch), FitAxisThresholds(angles[1], Axis::kYaw),
          FitAxisThresholds(angles[2], Axis::kRoll)};
}

PoseClass PoseClass::FromIndex(int index) {
  if (index < 0 || index >= kPoseClassCount) {
    throw Error(ErrorCode::kInvalidArgument, "pose class index out of range");
  }
  return PoseClass{index / 9 + 1, (index / 3) % 3 + 1, index % 3 + 1};
}

PoseClass AssignPoseClass(const std::optional<Pose>& pose, const PoseThresholds& thresholds) {
  if (!pose) throw Error(ErrorCode::kMissingPose, "image has no pose");
  return PoseClass{thresholds[0].Classify(pose->pitch), thresholds[1].Classify(pose->yaw),
                   thresholds[2].Classify(pose->roll)};
}

std::vector<uint64_t> EvenSample(std::span<const PoseCandidate> candidates, std::size_t total,
                                 uint64_t seed) {
  if (total > candidates.size()) {
    throw Error(ErrorCode::kNotEnoughCandidates,
                "requested " + std::to_string(total) + " of " +
                    std::to_string(candidates.size()) + " candidates");
  }
  std::array<std::vector<uint64_t>, kPoseClassCount> buckets;
  for (const auto& c : candidates) buckets[c.pose_class.Index()].push_back(c.image_id);
  Rng rng(seed);
  for (auto& b : buckets) {
    std::sort(b.begin(), b.end());
    rng.Shuffle(b);
  }
  std::vector<uint64_t> out;
  out.reserve(total);
  std::size_t round = 0;
  while (out.size() < total) {
    for (auto& b : buckets) {
      if (out.size() == total) break;
      if (round < b.size()) out.push_back(b[round]);
    }
    ++round;
  }
  return out;
}

}  // namespace fairbench
