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

#include "fairbench/geometry.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "fairbench/error.h"
#include "fairbench/parallel.h"

namespace fairbench {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

Mat3 Multiply(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
    }
  }
  return c;
}

Mat3 RotationMatrix(const Pose& p) {
  const double cx = std::cos(p.pitch * kDegToRad), sx = std::sin(p.pitch * kDegToRad);
  const double cy = std::cos(p.yaw * kDegToRad), sy = std::sin(p.yaw * kDegToRad);
  const double cz = std::cos(p.roll * kDegToRad), sz = std::sin(p.roll * kDegToRad);
  const Mat3 rx{{{1, 0, 0}, {0, cx, -sx}, {0, sx, cx}}};
  const Mat3 ry{{{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}}};
  const Mat3 rz{{{cz, -sz, 0}, {sz, cz, 0}, {0, 0, 1}}};
  return Multiply(Multiply(rx, ry), rz);
}

bool NeighborLess(const Neighbor& a, const Neighbor& b) {
  return a.dist < b.dist || (a.dist == b.dist && a.image_id < b.image_id);
}

}  // namespace

double EuclideanDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double ChordToAngleDeg(double dist) {
  const double half = std::clamp(dist / 2.0, 0.0, 1.0);
  return 2.0 * std::asin(half) * kRadToDeg;
}

PairDistance ComputePairDistance(const EmbeddingSet& set, uint64_t a, uint64_t b) {
  if (!set.IsNormalized()) {
    throw Error(ErrorCode::kNotNormalized, "embedding set is not normalized");
  }
  PairDistance out;
  out.image_a = a;
  out.image_b = b;
  out.dist = std::min(2.0, EuclideanDistance(set.Vector(a), set.Vector(b)));
  out.angle_deg = ChordToAngleDeg(out.dist);
  return out;
}

std::vector<NeighborList> TopK(const EmbeddingSet& set, std::span<const uint64_t> queries,
                               const TopKOptions& options, const Corpus* corpus) {
  if (options.k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  if (!set.IsNormalized()) {
    throw Error(ErrorCode::kNotNormalized, "embedding set is not normalized");
  }
  if (options.exclude_same_identity && corpus == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "exclude_same_identity requires a corpus");
  }
  std::vector<std::size_t> query_rows(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    auto row = set.RowOf(queries[q]);
    if (!row) throw Error(ErrorCode::kUnknownId, "unknown image_id " + std::to_string(queries[q]));
    query_rows[q] = *row;
  }
  std::vector<uint64_t> identity_of;
  if (options.exclude_same_identity) {
    identity_of.resize(set.size());
    for (std::size_t r = 0; r < set.size(); ++r) {
      identity_of[r] = corpus->Image(set.IdAt(r)).identity_id;
    }
  }

  std::vector<NeighborList> out(queries.size());
  ParallelFor(queries.size(), options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<Neighbor> scratch;
    scratch.reserve(set.size());
    for (std::size_t q = begin; q < end; ++q) {
      const std::size_t qrow = query_rows[q];
      const auto qv = set.Row(qrow);
      scratch.clear();
      for (std::size_t r = 0; r < set.size(); ++r) {
        if (r == qrow) continue;
        if (options.exclude_same_identity && identity_of[r] == identity_of[qrow]) continue;
        scratch.push_back({set.IdAt(r), std::min(2.0, EuclideanDistance(qv, set.Row(r)))});
      }
      if (scratch.size() < options.k) {
        throw Error(ErrorCode::kKTooLarge,
                    "k=" + std::to_string(options.k) + " exceeds the " +
                        std::to_string(scratch.size()) + " eligible candidates of image " +
                        std::to_string(queries[q]));
      }
      std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(options.k),
                        scratch.end(), NeighborLess);
      out[q].query = queries[q];
      out[q].neighbors.assign(scratch.begin(),
                              scratch.begin() + static_cast<std::ptrdiff_t>(options.k));
    }
  });
  return out;
}

double RotationAngleDeg(const Pose& a, const Pose& b) {
  for (double x : {a.pitch, a.yaw, a.roll, b.pitch, b.yaw, b.roll}) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNonFiniteInput, "non-finite pose angle");
  }
  const Mat3 ra = RotationMatrix(a);
  const Mat3 rb = RotationMatrix(b);
  // Relative rotation M = Ra^T Rb. cos(theta) from the trace and sin(theta)
  // from the skew part; atan2 keeps precision near 0 and 180 degrees.
  Mat3 m{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      m[i][j] = ra[0][i] * rb[0][j] + ra[1][i] * rb[1][j] + ra[2][i] * rb[2][j];
    }
  }
  const double cos_theta = (m[0][0] + m[1][1] + m[2][2] - 1.0) / 2.0;
  const double vx = m[2][1] - m[1][2];
  const double vy = m[0][2] - m[2][0];
  const double vz = m[1][0] - m[0][1];
  const double sin_theta = std::sqrt(vx * vx + vy * vy + vz * vz) / 2.0;
  return std::atan2(sin_theta, cos_theta) * kRadToDeg;
}

}  // namespace fairbench
