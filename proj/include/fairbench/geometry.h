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

#ifndef FAIRBENCH_GEOMETRY_H_
#define FAIRBENCH_GEOMETRY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fairbench/attributes.h"
#include "fairbench/corpus.h"

namespace fairbench {

struct PairDistance {
  uint64_t image_a = 0;
  uint64_t image_b = 0;
  double dist = 0.0;       // [0, 2] on unit vectors
  double angle_deg = 0.0;  // [0, 180]
};

struct Neighbor {
  uint64_t image_id = 0;
  double dist = 0.0;
};

struct NeighborList {
  uint64_t query = 0;
  std::vector<Neighbor> neighbors;  // ascending by (dist, image_id)
};

// Euclidean distance, summed in component order. Exactly symmetric in (a, b)
// because (x - y)^2 and (y - x)^2 round identically.
double EuclideanDistance(std::span<const double> a, std::span<const double> b);

// Angle in degrees subtended by a chord of length `dist` on the unit sphere:
// 2 * asin(dist / 2).
double ChordToAngleDeg(double dist);

// Throws kUnknownId, kNotNormalized.
PairDistance ComputePairDistance(const EmbeddingSet& set, uint64_t a, uint64_t b);

struct TopKOptions {
  std::size_t k = 1;
  bool exclude_same_identity = false;
  std::size_t threads = 1;
};

// Exact k nearest neighbours of each query among all other images of `set`.
// `corpus` supplies identities and is required when exclude_same_identity is
// set. Throws kKTooLarge when fewer than k candidates are eligible for some
// query, kNotNormalized, kUnknownId, kInvalidArgument (k == 0).
std::vector<NeighborList> TopK(const EmbeddingSet& set, std::span<const uint64_t> queries,
                               const TopKOptions& options, const Corpus* corpus = nullptr);

// Geodesic angle in degrees between two head rotations built as
// R = Rx(pitch) * Ry(yaw) * Rz(roll). Throws kNonFiniteInput.
double RotationAngleDeg(const Pose& a, const Pose& b);

}  // namespace fairbench

#endif  // FAIRBENCH_GEOMETRY_H_
