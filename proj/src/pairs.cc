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

#include "fairbench/pairs.h"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "fairbench/error.h"
#include "fairbench/geometry.h"
#include "fairbench/parallel.h"
#include "fairbench/random.h"
#include "fairbench/text.h"

namespace fairbench {

namespace {

using IdPair = std::pair<uint64_t, uint64_t>;

IdPair Canonical(uint64_t a, uint64_t b) { return a < b ? IdPair{a, b} : IdPair{b, a}; }

struct IdPairHash {
  std::size_t operator()(const IdPair& p) const {
    return std::hash<uint64_t>()(p.first * 0x9E3779B97F4A7C15ULL ^ p.second);
  }
};

// Candidate for extreme-pair selection. `key` is the distance for negatives
// and the negated distance for positives so both selections keep the
// smallest (key, a, b).
struct Scored {
  double key;
  uint64_t a;
  uint64_t b;
  double dist;

  bool operator<(const Scored& o) const {
    return std::tie(key, a, b) < std::tie(o.key, o.a, o.b);
  }
};

// Keeps the `limit` smallest elements seen so far.
class BoundedSelection {
 public:
  explicit BoundedSelection(std::size_t limit) : limit_(limit) {}

  void Offer(const Scored& s) {
    if (limit_ == 0) return;
    if (heap_.size() < limit_) {
      heap_.push(s);
    } else if (s < heap_.top()) {
      heap_.pop();
      heap_.push(s);
    }
  }

  std::size_t seen() const { return seen_; }
  void Count() { ++seen_; }

  std::vector<Scored> Drain() {
    std::vector<Scored> out;
    out.reserve(heap_.size());
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    return out;
  }

 private:
  std::size_t limit_;
  std::size_t seen_ = 0;
  std::priority_queue<Scored> heap_;  // max-heap: top is the worst kept
};

// Draws `want` distinct indices from [0, population) in draw order.
std::vector<uint64_t> SampleDistinct(uint64_t population, std::size_t want, Rng& rng) {
  std::vector<uint64_t> out;
  out.reserve(want);
  if (want * 2 <= population) {
    std::unordered_set<uint64_t> taken;
    while (out.size() < want) {
      const uint64_t x = rng.UniformIndex(population);
      if (taken.insert(x).second) out.push_back(x);
    }
  } else {
    std::vector<uint64_t> all(population);
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t i = 0; i < want; ++i) {
      const uint64_t j = i + rng.UniformIndex(population - i);
      std::swap(all[i], all[j]);
      out.push_back(all[i]);
    }
  }
  return out;
}

std::size_t Choose2(std::size_t n) { return n * (n - 1) / 2; }

}  // namespace

Combo Combo::Of(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  return Combo{std::string(a), std::string(b)};
}

std::string Combo::ToString() const { return lo + "\xC3\x97" + hi; }

const Combo& PairAttributes::Get(Attribute a) const {
  switch (a) {
    case Attribute::kGender: return gender;
    case Attribute::kAge: return age;
    case Attribute::kEthnicity: return ethnicity;
  }
  return gender;
}

std::size_t PairSet::n_pos() const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.positive; }));
}

bool PairSet::labeled() const {
  return std::all_of(pairs.begin(), pairs.end(),
                     [](const auto& p) { return p.attributes.has_value(); });
}

bool PairSet::has_distances() const {
  return std::all_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.dist.has_value(); });
}

PairSet BuildRandomPairs(const Corpus& corpus, std::size_t n_pos, std::size_t n_neg,
                         uint64_t seed) {
  const auto& identities = corpus.identities();
  if (identities.size() < 2) {
    throw Error(ErrorCode::kNotEnoughPairs, "random pairs need at least 2 identities");
  }
  // Positives are indexed identity by identity.
  std::vector<std::size_t> offsets;
  std::size_t n_within = 0;
  for (const auto& id : identities) {
    offsets.push_back(n_within);
    n_within += Choose2(id.image_ids.size());
  }
  const std::size_t n_images = corpus.images().size();
  const std::size_t n_cross = Choose2(n_images) - n_within;
  if (n_pos > n_within) {
    throw Error(ErrorCode::kNotEnoughPairs, "requested " + std::to_string(n_pos) +
                                                " positive pairs but only " +
                                                std::to_string(n_within) + " exist");
  }
  if (n_neg > n_cross) {
    throw Error(ErrorCode::kNotEnoughPairs, "requested " + std::to_string(n_neg) +
                                                " negative pairs but only " +
                                                std::to_string(n_cross) + " exist");
  }

  Rng rng(seed);
  PairSet out;
  out.pairs.reserve(n_pos + n_neg);

  for (uint64_t index : SampleDistinct(n_within, n_pos, rng)) {
    const std::size_t k = static_cast<std::size_t>(
        std::upper_bound(offsets.begin(), offsets.end(), index) - offsets.begin() - 1);
    const auto& ids = identities[k].image_ids;
    uint64_t t = index - offsets[k];
    std::size_t i = 0;
    while (t >= ids.size() - 1 - i) {
      t -= ids.size() - 1 - i;
      ++i;
    }
    const std::size_t j = i + 1 + static_cast<std::size_t>(t);
    out.pairs.push_back({ids[i], ids[j], true, std::nullopt, std::nullopt});
  }

  const auto& images = corpus.images();
  if (n_neg * 2 <= n_cross) {
    std::unordered_set<IdPair, IdPairHash> taken;
    while (taken.size() < n_neg) {
      const std::size_t i = static_cast<std::size_t>(rng.UniformIndex(n_images));
      std::size_t j = static_cast<std::size_t>(rng.UniformIndex(n_images - 1));
      if (j >= i) ++j;
      if (images[i].identity_id == images[j].identity_id) continue;
      const IdPair p = Canonical(images[i].image_id, images[j].image_id);
      if (taken.insert(p).second) {
        out.pairs.push_back({p.first, p.second, false, std::nullopt, std::nullopt});
      }
    }
  } else {
    std::vector<IdPair> all;
    all.reserve(n_cross);
    for (std::size_t i = 0; i < n_images; ++i) {
      for (std::size_t j = i + 1; j < n_images; ++j) {
        if (images[i].identity_id != images[j].identity_id) {
          all.emplace_back(images[i].image_id, images[j].image_id);
        }
      }
    }
    for (std::size_t i = 0; i < n_neg; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.UniformIndex(all.size() - i));
      std::swap(all[i], all[j]);
      out.pairs.push_back({all[i].first, all[i].second, false, std::nullopt, std::nullopt});
    }
  }
  return out;
}

PairSet HardenPairs(const Corpus& corpus, const PairSet& base, std::size_t threads) {
  const EmbeddingSet& emb = corpus.embeddings();
  if (!emb.IsNormalized()) throw Error(ErrorCode::kNotNormalized, "embeddings not normalized");

  std::set<uint64_t> eligible_set;
  for (const auto& p : base.pairs) {
    eligible_set.insert(p.image_a);
    eligible_set.insert(p.image_b);
  }
  const std::vector<uint64_t> eligible(eligible_set.begin(), eligible_set.end());
  std::vector<std::size_t> rows(eligible.size());
  std::vector<uint64_t> identity(eligible.size());
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    identity[i] = corpus.Image(eligible[i]).identity_id;
    rows[i] = *emb.RowOf(eligible[i]);
  }
  const std::size_t n_pos = base.n_pos();
  const std::size_t n_neg = base.n_neg();

  threads = std::max<std::size_t>(1, threads);
  std::vector<BoundedSelection> pos_sel(threads, BoundedSelection(n_pos));
  std::vector<BoundedSelection> neg_sel(threads, BoundedSelection(n_neg));
  // Rows are dealt round-robin so the triangular workload stays balanced.
  ParallelFor(threads, threads, [&](std::size_t t_begin, std::size_t t_end) {
    for (std::size_t t = t_begin; t < t_end; ++t) {
      for (std::size_t i = t; i < eligible.size(); i += threads) {
        const auto vi = emb.Row(rows[i]);
        for (std::size_t j = i + 1; j < eligible.size(); ++j) {
          const double d = std::min(2.0, EuclideanDistance(vi, emb.Row(rows[j])));
          if (identity[i] == identity[j]) {
            pos_sel[t].Count();
            pos_sel[t].Offer({-d, eligible[i], eligible[j], d});
          } else {
            neg_sel[t].Count();
            neg_sel[t].Offer({d, eligible[i], eligible[j], d});
          }
        }
      }
    }
  });

  auto merge = [](std::vector<BoundedSelection>& parts, std::size_t want, const char* what) {
    std::size_t seen = 0;
    std::vector<Scored> all;
    for (auto& part : parts) {
      seen += part.seen();
      auto drained = part.Drain();
      all.insert(all.end(), drained.begin(), drained.end());
    }
    if (seen < want) {
      throw Error(ErrorCode::kNotEnoughPairs, "need " + std::to_string(want) + " " + what +
                                                  " pairs, eligible images yield " +
                                                  std::to_string(seen));
    }
    std::sort(all.begin(), all.end());
    all.resize(want);
    return all;
  };
  const auto positives = merge(pos_sel, n_pos, "positive");
  const auto negatives = merge(neg_sel, n_neg, "negative");

  PairSet out;
  out.pairs.reserve(n_pos + n_neg);
  for (const auto& s : positives) out.pairs.push_back({s.a, s.b, true, std::nullopt, s.dist});
  for (const auto& s : negatives) out.pairs.push_back({s.a, s.b, false, std::nullopt, s.dist});
  return out;
}

PairSet LabelPairs(const Corpus& corpus, const PairSet& set) {
  PairSet out = set;
  for (auto& p : out.pairs) {
    const ImageRecord& a = corpus.Image(p.image_a);
    const ImageRecord& b = corpus.Image(p.image_b);
    if ((a.identity_id == b.identity_id) != p.positive) {
      throw Error(ErrorCode::kLabelMismatch,
                  "pair (" + std::to_string(p.image_a) + ", " + std::to_string(p.image_b) +
                      ") label contradicts identities");
    }
    PairAttributes attrs;
    attrs.gender = Combo::Of(Name(a.gender), Name(b.gender));
    attrs.age = Combo::Of(Name(a.age_group), Name(b.age_group));
    attrs.ethnicity = Combo::Of(Name(a.ethnicity), Name(b.ethnicity));
    attrs.hard = a.gender == b.gender && a.age_group == b.age_group && a.ethnicity == b.ethnicity;
    if (a.pose && b.pose) attrs.pose_angle_deg = RotationAngleDeg(*a.pose, *b.pose);
    p.attributes = std::move(attrs);
  }
  return out;
}

PairSet AttachDistances(const EmbeddingSet& embeddings, const PairSet& set, std::size_t threads) {
  if (!embeddings.IsNormalized()) {
    throw Error(ErrorCode::kNotNormalized, "embeddings not normalized");
  }
  PairSet out = set;
  ParallelFor(out.pairs.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& p = out.pairs[i];
      p.dist = ComputePairDistance(embeddings, p.image_a, p.image_b).dist;
    }
  });
  return out;
}

PairSet ShufflePairs(const PairSet& set, uint64_t seed) {
  PairSet out = set;
  Rng rng(seed);
  rng.Shuffle(out.pairs);
  return out;
}

std::map<std::string, std::size_t> ComboHistogram(const PairSet& set, Attribute attribute) {
  std::map<std::string, std::size_t> hist;
  for (const auto& p : set.pairs) {
    if (!p.attributes) throw Error(ErrorCode::kUnlabeledSet, "pair set is not labeled");
    ++hist[p.attributes->Get(attribute).ToString()];
  }
  return hist;
}

PairSet ReadPairs(const std::string& path) {
  const auto lines = ReadLines(path);
  if (lines.empty() || lines[0] != "image_a,image_b,label") {
    throw Error(ErrorCode::kMalformedFile, path + ": missing or wrong header");
  }
  PairSet out;
  std::unordered_set<IdPair, IdPairHash> seen;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto where = path + ":" + std::to_string(ln + 1) + ": ";
    const auto f = SplitCsv(lines[ln]);
    if (f.size() != 3) throw Error(ErrorCode::kMalformedFile, where + "expected 3 fields");
    auto a = ParseU64(f[0]);
    auto b = ParseU64(f[1]);
    if (!a || !b || *a == *b) throw Error(ErrorCode::kMalformedFile, where + "bad image ids");
    if (f[2] != "0" && f[2] != "1") throw Error(ErrorCode::kMalformedFile, where + "bad label");
    if (!seen.insert(Canonical(*a, *b)).second) {
      throw Error(ErrorCode::kMalformedFile, where + "duplicate pair");
    }
    out.pairs.push_back({*a, *b, f[2] == "1", std::nullopt, std::nullopt});
  }
  return out;
}

std::string PairsToCsv(const PairSet& set) {
  std::ostringstream out;
  out << "image_a,image_b,label\n";
  for (const auto& p : set.pairs) {
    out << p.image_a << ',' << p.image_b << ',' << (p.positive ? '1' : '0') << '\n';
  }
  return out.str();
}

void WritePairs(const std::string& path, const PairSet& set) {
  WriteFileAtomic(path, PairsToCsv(set));
}

}  // namespace fairbench
