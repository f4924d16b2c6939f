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

#ifndef FAIRBENCH_QUANTILE_H_
#define FAIRBENCH_QUANTILE_H_

#include <cmath>
#include <cstddef>
#include <span>

namespace fairbench {

// Linear-interpolation empirical quantile of ascending data: position
// h = (n - 1) * p between order statistics floor(h) and floor(h) + 1.
inline double LinearQuantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) return NAN;
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace fairbench

#endif  // FAIRBENCH_QUANTILE_H_
