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

#include "fairbench/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fairbench/error.h"
#include "fairbench/random.h"

namespace fairbench {

namespace {

constexpr uint64_t kPairStreamBase = 1ULL << 40;
constexpr uint64_t kCenterStream = 1ULL << 41;

double Phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

template <std::size_t N>
void CheckProportions(const std::array<double, N>& p, const char* what) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) {
      throw Error(ErrorCode::kInvalidScenario, std::string(what) + " proportions must be >= 0");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidScenario, std::string(what) + " proportions must sum to 1");
  }
}

std::vector<double> RandomUnit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = rng.Normal();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<double> Perturb(const std::vector<double>& center, double sigma, Rng& rng) {
  std::vector<double> v(center.size());
  const double scale = sigma / std::sqrt(static_cast<double>(center.size()));
  double norm = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = center[i] + scale * rng.Normal();
    norm += v[i] * v[i];
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

// Unit vector at Euclidean distance `dist` from unit vector `a`.
std::vector<double> AtDistance(const std::vector<double>& a, double dist, Rng& rng) {
  const double theta = 2.0 * std::asin(std::clamp(dist / 2.0, 0.0, 1.0));
  std::vector<double> v;
  double norm = 0.0;
  do {
    v = RandomUnit(rng, a.size());
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += v[i] * a[i];
    norm = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      v[i] -= dot * a[i];
      norm += v[i] * v[i];
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  std::vector<double> b(a.size());
  double bn = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    b[i] = std::cos(theta) * a[i] + std::sin(theta) * v[i] / norm;
    bn += b[i] * b[i];
  }
  bn = std::sqrt(bn);
  for (double& x : b) x /= bn;
  return b;
}

bool Matches(const PlantedEffect& e, Gender g, Ethnicity eth, AgeGroup a) {
  switch (e.attribute) {
    case Attribute::kGender: return Name(g) == e.level;
    case Attribute::kAge: return Name(a) == e.level;
    case Attribute::kEthnicity: return Name(eth) == e.level;
  }
  return false;
}

// Combined distance model of the effects matching one anchor image.
struct PairModel {
  double pos_mean = 0.0;
  double neg_mean = 0.0;
  double fpr_mix = 0.0;
  double tpr_mix = 0.0;
  double pose_spread = 1.0;
};

PairModel ModelFor(const Scenario& s, const std::vector<const PlantedEffect*>& effects,
                   double threshold) {
  PairModel m;
  m.pos_mean = s.pos_mean;
  m.neg_mean = s.neg_mean;
  for (const auto* e : effects) {
    m.pos_mean += e->pos_shift;
    m.neg_mean += e->neg_shift;
    m.pose_spread *= e->pose_spread;
  }
  const double separation =
      Phi((threshold - m.pos_mean) / s.dist_sd) - Phi((threshold - m.neg_mean) / s.dist_sd);
  for (const auto* e : effects) {
    if (e->fpr_lift == 0.0 && e->tpr_drop == 0.0) continue;
    if (!(separation > 0)) {
      throw Error(ErrorCode::kInvalidScenario,
                  "effect on " + e->level + " cannot lift rates: distributions not separated");
    }
    m.fpr_mix += e->fpr_lift / separation;
    m.tpr_mix += e->tpr_drop / separation;
  }
  if (m.fpr_mix > 1.0 || m.tpr_mix > 1.0 || m.fpr_mix < 0.0 || m.tpr_mix < 0.0) {
    throw Error(ErrorCode::kInvalidScenario, "planted rate effects exceed what the model allows");
  }
  return m;
}

double ReferenceThreshold(const Scenario& s) {
  const double mid = (s.pos_mean + s.neg_mean) / 2.0;
  if (s.n_pos == 0 || s.n_neg == 0) return mid;
  const double log_ratio =
      std::log(static_cast<double>(s.n_neg) / static_cast<double>(s.n_pos));
  return mid + s.dist_sd * s.dist_sd * log_ratio / (s.pos_mean - s.neg_mean);
}

double SampleAngle(const AxisModel& m, double spread, Rng& rng) {
  const double scale = m.scale * spread;
  const double x = m.shape == PoseShape::kNormal ? scale * rng.Normal() : rng.Laplace(scale);
  return std::clamp(x, -180.0, 180.0);
}

Pose SamplePose(const Scenario& s, double spread, Rng& rng) {
  Pose p;
  p.pitch = SampleAngle(s.pose[0], spread, rng);
  p.yaw = SampleAngle(s.pose[1], spread, rng);
  p.roll = SampleAngle(s.pose[2], spread, rng);
  return p;
}

template <std::size_t N>
std::vector<double> AsVector(const std::array<double, N>& a) {
  return std::vector<double>(a.begin(), a.end());
}

class Generator {
 public:
  explicit Generator(const Scenario& s) : s_(s) {
    Rng rng = Rng::Derive(s.seed, kCenterStream);
    for (std::size_t e = 0; e < 4; ++e) centers_.push_back(RandomUnit(rng, s.dim));
    reference_threshold_ = ReferenceThreshold(s);
  }

  double reference_threshold() const { return reference_threshold_; }

  std::vector<const PlantedEffect*> EffectsFor(Gender g, Ethnicity e, AgeGroup a) const {
    std::vector<const PlantedEffect*> out;
    for (const auto& eff : s_.effects) {
      if (Matches(eff, g, e, a)) out.push_back(&eff);
    }
    return out;
  }

  double IdentitySpread(Gender g, Ethnicity e) const {
    double spread = s_.identity_spread;
    for (const auto& eff : s_.effects) {
      if (eff.spread && eff.attribute != Attribute::kAge && Matches(eff, g, e, AgeGroup::kAdult)) {
        spread = *eff.spread;
      }
    }
    return spread;
  }

  std::vector<double> IdentityCenter(Gender g, Ethnicity e, Rng& rng) const {
    return Perturb(centers_[static_cast<std::size_t>(e)], IdentitySpread(g, e), rng);
  }

  double PoseSpread(Gender g, Ethnicity e, AgeGroup a) const {
    double spread = 1.0;
    for (const auto* eff : EffectsFor(g, e, a)) spread *= eff->pose_spread;
    return spread;
  }

  ImageRecord Image(uint64_t image_id, uint64_t identity_id, Gender g, Ethnicity e, AgeGroup a,
                    Rng& rng) const {
    ImageRecord rec{image_id, identity_id, g, e, a, std::nullopt};
    rec.pose = SamplePose(s_, PoseSpread(g, e, a), rng);
    return rec;
  }

  Gender SampleGender(Rng& rng) const {
    return static_cast<Gender>(rng.Categorical(AsVector(s_.gender_p)));
  }
  Ethnicity SampleEthnicity(Rng& rng) const {
    return static_cast<Ethnicity>(rng.Categorical(AsVector(s_.ethnicity_p)));
  }
  AgeGroup SampleAge(Rng& rng) const {
    return static_cast<AgeGroup>(rng.Categorical(AsVector(s_.age_p)));
  }

 private:
  const Scenario& s_;
  std::vector<std::vector<double>> centers_;
  double reference_threshold_ = 0.0;
};

}  // namespace

void ValidateScenario(const Scenario& s) {
  if (s.dim < 2) throw Error(ErrorCode::kInvalidScenario, "dim must be >= 2");
  CheckProportions(s.gender_p, "gender");
  CheckProportions(s.ethnicity_p, "ethnicity");
  CheckProportions(s.age_p, "age");
  if (s.n_identities > 0 && s.images_per_identity == 0) {
    throw Error(ErrorCode::kInvalidScenario, "images_per_identity must be >= 1");
  }
  if (s.n_identities == 0 && s.n_pos + s.n_neg == 0) {
    throw Error(ErrorCode::kInvalidScenario, "scenario generates no images");
  }
  if (!(s.identity_spread >= 0) || !(s.image_spread >= 0)) {
    throw Error(ErrorCode::kInvalidScenario, "spreads must be >= 0");
  }
  for (const auto& axis : s.pose) {
    if (!(axis.scale > 0) || !std::isfinite(axis.scale)) {
      throw Error(ErrorCode::kInvalidScenario, "pose scales must be positive");
    }
  }
  if (!(s.dist_sd > 0) || !(s.pos_mean >= 0 && s.pos_mean <= 2) ||
      !(s.neg_mean >= 0 && s.neg_mean <= 2) || !(s.pos_mean < s.neg_mean)) {
    throw Error(ErrorCode::kInvalidScenario,
                "pair distance model needs 0 <= pos_mean < neg_mean <= 2 and sd > 0");
  }
  for (const auto& e : s.effects) {
    const auto levels = LevelNames(e.attribute);
    if (std::find(levels.begin(), levels.end(), e.level) == levels.end()) {
      throw Error(ErrorCode::kInvalidScenario, "unknown effect level " + e.level);
    }
    if (e.spread && (e.attribute == Attribute::kAge || !(*e.spread >= 0))) {
      throw Error(ErrorCode::kInvalidScenario,
                  "spread effects apply to gender or ethnicity and must be >= 0");
    }
    if (!(e.pose_spread > 0)) {
      throw Error(ErrorCode::kInvalidScenario, "pose_spread must be positive");
    }
    ModelFor(s, {&e}, ReferenceThreshold(s));
  }
}

double GroundTruth::ExpectedTpr(const Scenario& s, const PlantedEffect* effect,
                                double threshold) const {
  std::vector<const PlantedEffect*> effects;
  if (effect != nullptr) effects.push_back(effect);
  const PairModel m = ModelFor(s, effects, reference_threshold);
  return (1.0 - m.tpr_mix) * Phi((threshold - m.pos_mean) / s.dist_sd) +
         m.tpr_mix * Phi((threshold - m.neg_mean) / s.dist_sd);
}

double GroundTruth::ExpectedFpr(const Scenario& s, const PlantedEffect* effect,
                                double threshold) const {
  std::vector<const PlantedEffect*> effects;
  if (effect != nullptr) effects.push_back(effect);
  const PairModel m = ModelFor(s, effects, reference_threshold);
  return (1.0 - m.fpr_mix) * Phi((threshold - m.neg_mean) / s.dist_sd) +
         m.fpr_mix * Phi((threshold - m.pos_mean) / s.dist_sd);
}

SynthOutput Generate(const Scenario& s) {
  ValidateScenario(s);
  Generator gen(s);
  SynthOutput out;
  out.truth.reference_threshold = gen.reference_threshold();
  out.truth.baseline_tpr = out.truth.ExpectedTpr(s, nullptr, out.truth.reference_threshold);
  out.truth.baseline_fpr = out.truth.ExpectedFpr(s, nullptr, out.truth.reference_threshold);
  for (const auto& e : s.effects) {
    const PairModel m = ModelFor(s, {&e}, out.truth.reference_threshold);
    SubgroupTruth t;
    t.attribute = std::string(Name(e.attribute));
    t.level = e.level;
    t.fpr_mix = m.fpr_mix;
    t.tpr_mix = m.tpr_mix;
    t.expected_tpr = out.truth.ExpectedTpr(s, &e, out.truth.reference_threshold);
    t.expected_fpr = out.truth.ExpectedFpr(s, &e, out.truth.reference_threshold);
    t.spread = e.spread.value_or(s.identity_spread);
    out.truth.subgroups.push_back(t);
  }

  EmbeddingSet embeddings(s.dim);
  std::vector<ImageRecord> images;
  const std::size_t n_cluster_images = s.n_identities * s.images_per_identity;
  images.reserve(n_cluster_images + 2 * (s.n_pos + s.n_neg));

  for (std::size_t k = 0; k < s.n_identities; ++k) {
    Rng rng = Rng::Derive(s.seed, k);
    const uint64_t identity_id = k + 1;
    const Gender g = gen.SampleGender(rng);
    const Ethnicity e = gen.SampleEthnicity(rng);
    const auto center = gen.IdentityCenter(g, e, rng);
    for (std::size_t j = 0; j < s.images_per_identity; ++j) {
      const uint64_t image_id = k * s.images_per_identity + j + 1;
      const AgeGroup a = gen.SampleAge(rng);
      embeddings.Insert(image_id, Perturb(center, s.image_spread, rng));
      images.push_back(gen.Image(image_id, identity_id, g, e, a, rng));
    }
  }

  const uint64_t identity_base = s.n_identities + 1;
  const uint64_t image_base = n_cluster_images + 1;
  for (std::size_t m = 0; m < s.n_pos + s.n_neg; ++m) {
    Rng rng = Rng::Derive(s.seed, kPairStreamBase + m);
    const bool positive = m < s.n_pos;
    const uint64_t id_a = positive ? identity_base + m : identity_base + s.n_pos + 2 * (m - s.n_pos);
    const uint64_t id_b = positive ? id_a : id_a + 1;
    const uint64_t img_a = image_base + 2 * m;
    const uint64_t img_b = img_a + 1;

    const Gender g = gen.SampleGender(rng);
    const Ethnicity e = gen.SampleEthnicity(rng);
    const AgeGroup age = gen.SampleAge(rng);
    Gender g_b = g;
    Ethnicity e_b = e;
    AgeGroup age_b = age;
    if (s.pair_mode == PairMode::kIndependent) {
      if (!positive) {
        g_b = gen.SampleGender(rng);
        e_b = gen.SampleEthnicity(rng);
      }
      age_b = gen.SampleAge(rng);
    }

    const PairModel model = ModelFor(s, gen.EffectsFor(g, e, age), out.truth.reference_threshold);
    double mean;
    if (positive) {
      mean = rng.Uniform01() < model.tpr_mix ? model.neg_mean : model.pos_mean;
    } else {
      mean = rng.Uniform01() < model.fpr_mix ? model.pos_mean : model.neg_mean;
    }
    const double dist = std::clamp(mean + s.dist_sd * rng.Normal(), 0.0, 2.0);
    const auto a_vec = Perturb(gen.IdentityCenter(g, e, rng), s.image_spread, rng);
    const auto b_vec = AtDistance(a_vec, dist, rng);
    embeddings.Insert(img_a, a_vec);
    embeddings.Insert(img_b, b_vec);
    images.push_back(gen.Image(img_a, id_a, g, e, age, rng));
    images.push_back(gen.Image(img_b, id_b, g_b, e_b, age_b, rng));
    out.pairs.pairs.push_back({img_a, img_b, positive, std::nullopt, std::nullopt});
  }

  out.corpus = Corpus::Assemble(std::move(embeddings), std::move(images));
  return out;
}

}  // namespace fairbench
