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

#include "fairbench/verify.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "fairbench/error.h"
#include "fairbench/geometry.h"
#include "fairbench/quantile.h"
#include "fairbench/random.h"

namespace fairbench {

namespace {

ThresholdResult SelectGlobal(std::span<const ScoredPair> pairs) {
  std::size_t n_pos = 0;
  for (const auto& p : pairs) n_pos += p.positive ? 1 : 0;
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "no pairs");
  if (n_pos == 0 || n_pos == pairs.size()) {
    throw Error(ErrorCode::kSingleClassInput, "threshold selection needs both labels");
  }
  std::vector<ScoredPair> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredPair& a, const ScoredPair& b) { return a.dist < b.dist; });

  // Below every distance all pairs are predicted negative.
  const std::size_t n_neg = pairs.size() - n_pos;
  std::size_t correct = n_neg;
  std::size_t best_correct = correct;
  double best_threshold = sorted.front().dist - 1.0;

  std::size_t i = 0;
  while (i < sorted.size()) {
    const double u = sorted[i].dist;
    while (i < sorted.size() && sorted[i].dist == u) {
      correct = sorted[i].positive ? correct + 1 : correct - 1;
      ++i;
    }
    double candidate;
    if (i < sorted.size()) {
      const double next = sorted[i].dist;
      candidate = u + (next - u) / 2.0;
      // Adjacent doubles: the midpoint may round up onto `next`.
      if (candidate >= next) candidate = u;
    } else {
      candidate = u + 1.0;
    }
    if (correct > best_correct) {
      best_correct = correct;
      best_threshold = candidate;
    }
  }
  ThresholdResult out;
  out.mode = ThresholdMode::kGlobal;
  out.threshold = best_threshold;
  out.accuracy = static_cast<double>(best_correct) / static_cast<double>(pairs.size());
  return out;
}

bool Predict(double dist, double threshold) { return dist <= threshold; }

}  // namespace

ThresholdResult SelectThreshold(std::span<const ScoredPair> pairs, const ThresholdSpec& spec) {
  if (spec.mode == ThresholdMode::kGlobal) return SelectGlobal(pairs);

  const std::size_t n = pairs.size();
  if (spec.k < 2 || spec.k > n) {
    throw Error(ErrorCode::kInvalidArgument,
                "kfold needs 2 <= k <= n, got k=" + std::to_string(spec.k));
  }
  SelectGlobal(pairs);  // rejects one-class input up front

  ThresholdResult out;
  out.mode = ThresholdMode::kKFold;
  std::size_t start = 0;
  double sum_threshold = 0.0;
  double sum_accuracy = 0.0;
  std::vector<ScoredPair> train;
  for (std::size_t f = 0; f < spec.k; ++f) {
    const std::size_t size = n / spec.k + (f < n % spec.k ? 1 : 0);
    const std::size_t end = start + size;
    train.clear();
    train.insert(train.end(), pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(start));
    train.insert(train.end(), pairs.begin() + static_cast<std::ptrdiff_t>(end), pairs.end());
    const ThresholdResult fit = SelectGlobal(train);
    std::size_t correct = 0;
    for (std::size_t i = start; i < end; ++i) {
      correct += Predict(pairs[i].dist, fit.threshold) == pairs[i].positive ? 1 : 0;
    }
    FoldResult fold;
    fold.threshold = fit.threshold;
    fold.n_test = size;
    fold.accuracy = static_cast<double>(correct) / static_cast<double>(size);
    sum_threshold += fold.threshold;
    sum_accuracy += fold.accuracy;
    out.per_fold.push_back(fold);
    start = end;
  }
  out.threshold = sum_threshold / static_cast<double>(spec.k);
  out.accuracy = sum_accuracy / static_cast<double>(spec.k);
  return out;
}

std::vector<ScoredPair> ToScored(const PairSet& pairs) {
  std::vector<ScoredPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs.pairs) {
    if (!p.dist) throw Error(ErrorCode::kInvalidArgument, "pair set has no distances");
    out.push_back({*p.dist, p.positive});
  }
  return out;
}

ThresholdResult SelectThreshold(const PairSet& pairs, const ThresholdSpec& spec) {
  const auto scored = ToScored(pairs);
  return SelectThreshold(scored, spec);
}

std::string_view Name(Conditioning c) { return c == Conditioning::kLevel ? "level" : "combo"; }

std::string_view Name(Restrict r) {
  switch (r) {
    case Restrict::kAll: return "all";
    case Restrict::kHard: return "hard";
    case Restrict::kSoft: return "soft";
  }
  return "";
}

std::string_view Name(MetricName m) {
  switch (m) {
    case MetricName::kAccuracy: return "accuracy";
    case MetricName::kTpr: return "tpr";
    case MetricName::kFpr: return "fpr";
    case MetricName::kTnr: return "tnr";
  }
  return "";
}

std::optional<Restrict> ParseRestrict(std::string_view s) {
  for (Restrict r : {Restrict::kAll, Restrict::kHard, Restrict::kSoft}) {
    if (Name(r) == s) return r;
  }
  return std::nullopt;
}

std::optional<MetricName> ParseMetricName(std::string_view s) {
  for (MetricName m : {MetricName::kAccuracy, MetricName::kTpr, MetricName::kFpr,
                       MetricName::kTnr}) {
    if (Name(m) == s) return m;
  }
  return std::nullopt;
}

std::optional<double> SubgroupMetrics::Get(MetricName m) const {
  switch (m) {
    case MetricName::kAccuracy: return accuracy;
    case MetricName::kTpr: return tpr;
    case MetricName::kFpr: return fpr;
    case MetricName::kTnr: return tnr;
  }
  return std::nullopt;
}

std::size_t SubgroupMetrics::Support(MetricName m) const {
  switch (m) {
    case MetricName::kAccuracy: return n;
    case MetricName::kTpr: return n_pos;
    case MetricName::kFpr:
    case MetricName::kTnr: return n_neg;
  }
  return 0;
}

PairSet FilterPairs(const PairSet& pairs, Restrict restrict) {
  if (!pairs.labeled()) throw Error(ErrorCode::kUnlabeledSet, "pair set is not labeled");
  if (restrict == Restrict::kAll) return pairs;
  PairSet out;
  for (const auto& p : pairs.pairs) {
    if (p.attributes->hard == (restrict == Restrict::kHard)) out.pairs.push_back(p);
  }
  return out;
}

std::vector<SubgroupMetrics> ComputeSubgroupMetrics(const PairSet& pairs, double threshold,
                                                    Attribute attribute,
                                                    Conditioning conditioning,
                                                    Restrict restrict) {
  if (!pairs.labeled()) throw Error(ErrorCode::kUnlabeledSet, "pair set is not labeled");
  std::map<std::string, SubgroupMetrics> slices;
  std::vector<std::string> order;
  if (conditioning == Conditioning::kLevel) {
    order = LevelNames(attribute);
    for (const auto& level : order) slices[level].key = level;
  }
  for (const auto& p : pairs.pairs) {
    if (!p.dist) throw Error(ErrorCode::kInvalidArgument, "pair set has no distances");
    const PairAttributes& attrs = *p.attributes;
    if (restrict == Restrict::kHard && !attrs.hard) continue;
    if (restrict == Restrict::kSoft && attrs.hard) continue;
    const Combo& combo = attrs.Get(attribute);
    std::string key;
    if (conditioning == Conditioning::kLevel) {
      if (!combo.Uniform()) continue;
      key = combo.lo;
    } else {
      key = combo.ToString();
    }
    SubgroupMetrics& m = slices[key];
    m.key = key;
    const bool predicted = Predict(*p.dist, threshold);
    ++m.n;
    if (p.positive) {
      ++m.n_pos;
      m.true_pos += predicted ? 1 : 0;
    } else {
      ++m.n_neg;
      m.false_pos += predicted ? 1 : 0;
    }
    m.correct += predicted == p.positive ? 1 : 0;
  }
  if (conditioning == Conditioning::kCombo) {
    for (const auto& [key, m] : slices) order.push_back(key);
  }
  std::vector<SubgroupMetrics> out;
  for (const auto& key : order) {
    SubgroupMetrics m = slices[key];
    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
      if (den == 0) return std::nullopt;
      return static_cast<double>(num) / static_cast<double>(den);
    };
    m.accuracy = ratio(m.correct, m.n);
    m.tpr = ratio(m.true_pos, m.n_pos);
    m.fpr = ratio(m.false_pos, m.n_neg);
    m.tnr = ratio(m.n_neg - m.false_pos, m.n_neg);
    out.push_back(std::move(m));
  }
  return out;
}

double GapMatrix::MaxAbsZ() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (i == j) continue;
      const double v = std::abs(values[i][j]);
      const double se = standard_errors[i][j];
      if (se > 0) {
        worst = std::max(worst, v / se);
      } else if (v > 0) {
        return std::numeric_limits<double>::infinity();
      }
    }
  }
  return worst;
}

GapMatrix ComputeGapMatrix(std::span<const SubgroupMetrics> metrics, MetricName metric,
                           std::string attribute) {
  GapMatrix g;
  g.attribute = std::move(attribute);
  g.metric = metric;
  std::vector<double> v;
  std::vector<double> var;
  for (const auto& m : metrics) {
    const auto value = m.Get(metric);
    if (!value) {
      g.excluded.push_back(m.key);
      continue;
    }
    g.levels.push_back(m.key);
    v.push_back(*value);
    var.push_back(*value * (1.0 - *value) / static_cast<double>(m.Support(metric)));
  }
  if (g.levels.size() < 2) {
    throw Error(ErrorCode::kTooFewSubgroups,
                "gap matrix for " + g.attribute + " needs two defined subgroups");
  }
  const std::size_t k = g.levels.size();
  g.values.assign(k, std::vector<double>(k, 0.0));
  g.standard_errors.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      g.values[i][j] = v[i] - v[j];
      g.standard_errors[i][j] = std::sqrt(var[i] + var[j]);
    }
  }
  return g;
}

std::vector<DispersionGroup> CentroidDispersion(const Corpus& corpus, Attribute attribute,
                                                uint64_t seed) {
  const EmbeddingSet& emb = corpus.embeddings();
  if (!emb.IsNormalized()) throw Error(ErrorCode::kNotNormalized, "embeddings not normalized");
  const auto levels = LevelNames(attribute);
  std::vector<DispersionGroup> groups(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) groups[l].level = levels[l];

  for (const auto& identity : corpus.identities()) {
    Rng rng = Rng::Derive(seed, identity.identity_id);
    const uint64_t id = identity.image_ids[rng.UniformIndex(identity.image_ids.size())];
    const ImageRecord& img = corpus.Image(id);
    std::size_t level = 0;
    switch (attribute) {
      case Attribute::kGender: level = static_cast<std::size_t>(img.gender); break;
      case Attribute::kAge: level = static_cast<std::size_t>(img.age_group); break;
      case Attribute::kEthnicity: level = static_cast<std::size_t>(img.ethnicity); break;
    }
    groups[level].image_ids.push_back(id);
  }

  for (auto& g : groups) {
    if (g.image_ids.empty()) {
      throw Error(ErrorCode::kEmptyGroup, "no identity sampled for level " + g.level);
    }
    std::vector<double> centroid(emb.dim(), 0.0);
    for (uint64_t id : g.image_ids) {
      const auto v = emb.Vector(id);
      for (std::size_t i = 0; i < v.size(); ++i) centroid[i] += v[i];
    }
    for (double& c : centroid) c /= static_cast<double>(g.image_ids.size());
    for (uint64_t id : g.image_ids) {
      g.distances.push_back(EuclideanDistance(emb.Vector(id), centroid));
    }
    std::vector<double> sorted = g.distances;
    std::sort(sorted.begin(), sorted.end());
    g.summary.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
                     static_cast<double>(sorted.size());
    g.summary.median = LinearQuantile(sorted, 0.5);
    g.summary.q10 = LinearQuantile(sorted, 0.1);
    g.summary.q90 = LinearQuantile(sorted, 0.9);
  }
  return groups;
}

}  // namespace fairbench
