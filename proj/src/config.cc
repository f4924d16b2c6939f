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

#include "fairbench/config.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "fairbench/error.h"

namespace fairbench {

namespace {

using nlohmann::json;

[[noreturn]] void Bad(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, key + ": " + what);
}

// Wraps one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) Bad(where_.empty() ? "config" : where_, "expected an object");
  }

  std::string Key(const std::string& k) const { return where_.empty() ? k : where_ + "." + k; }

  const json* Get(const std::string& k) {
    seen_.insert(k);
    auto it = j_.find(k);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  std::optional<T> Opt(const std::string& k) {
    const json* v = Get(k);
    if (v == nullptr) return std::nullopt;
    return As<T>(*v, Key(k));
  }

  template <typename T>
  T Req(const std::string& k) {
    auto v = Opt<T>(k);
    if (!v) Bad(Key(k), "missing");
    return *v;
  }

  void Finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) Bad(Key(it.key()), "unknown key");
    }
  }

  template <typename T>
  static T As(const json& v, const std::string& key) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) Bad(key, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) Bad(key, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<int64_t>() >= 0)) {
        Bad(key, "expected a non-negative integer");
      }
      return static_cast<T>(v.get<uint64_t>());
    } else {
      if (!v.is_number()) Bad(key, "expected a number");
      return v.get<double>();
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string Resolve(const std::string& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return path.lexically_normal().string();
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

template <typename T, typename ParseFn>
std::vector<T> ParseList(const json* v, const std::string& key, ParseFn parse) {
  if (!v->is_array()) Bad(key, "expected an array");
  std::vector<T> out;
  for (const auto& item : *v) {
    const auto s = Fields::As<std::string>(item, key);
    auto parsed = parse(s);
    if (!parsed) Bad(key, "unknown value '" + s + "'");
    if (std::find(out.begin(), out.end(), *parsed) != out.end()) {
      Bad(key, "duplicate value '" + s + "'");
    }
    out.push_back(*parsed);
  }
  return out;
}

std::optional<Analysis> ParseAnalysis(std::string_view s) {
  for (Analysis a : {Analysis::kSubgroups, Analysis::kGaps, Analysis::kAnova, Analysis::kLogit,
                     Analysis::kBalance, Analysis::kPose, Analysis::kDispersion}) {
    if (Name(a) == s) return a;
  }
  return std::nullopt;
}

template <std::size_t N>
std::array<double, N> ParseProportions(const json* v, const std::string& key) {
  if (!v->is_array() || v->size() != N) {
    Bad(key, "expected an array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = Fields::As<double>((*v)[i], key);
  return out;
}

PairSource ParsePairSource(const json& j, const std::string& where, const std::string& base) {
  Fields f(j, where);
  PairSource p;
  const auto source = f.Req<std::string>("source");
  if (source == "random") {
    p.kind = PairSource::Kind::kRandom;
    p.n_pos = f.Req<std::size_t>("n_pos");
    p.n_neg = f.Req<std::size_t>("n_neg");
    p.seed = f.Opt<uint64_t>("seed");
  } else if (source == "file") {
    p.kind = PairSource::Kind::kFile;
    p.path = Resolve(base, f.Req<std::string>("path"));
  } else if (source == "harden") {
    p.kind = PairSource::Kind::kHarden;
    const json* b = f.Get("base");
    if (b == nullptr) Bad(f.Key("base"), "missing");
    p.base = std::make_shared<PairSource>(ParsePairSource(*b, f.Key("base"), base));
    if (p.base->kind == PairSource::Kind::kHarden) Bad(f.Key("base"), "cannot harden twice");
  } else if (source == "planted") {
    p.kind = PairSource::Kind::kPlanted;
  } else {
    Bad(f.Key("source"), "unknown pair source '" + source + "'");
  }
  p.shuffle = f.Opt<bool>("shuffle").value_or(false);
  f.Finish();
  return p;
}

json PairSourceToJson(const PairSource& p) {
  json j;
  j["source"] = std::string(Name(p.kind));
  j["shuffle"] = p.shuffle;
  switch (p.kind) {
    case PairSource::Kind::kRandom:
      j["n_pos"] = p.n_pos;
      j["n_neg"] = p.n_neg;
      if (p.seed) j["seed"] = *p.seed;
      break;
    case PairSource::Kind::kFile:
      j["path"] = p.path;
      break;
    case PairSource::Kind::kHarden:
      j["base"] = PairSourceToJson(*p.base);
      break;
    case PairSource::Kind::kPlanted:
      break;
  }
  return j;
}

std::string_view ShapeName(PoseShape s) { return s == PoseShape::kNormal ? "normal" : "laplace"; }

}  // namespace

std::string_view Name(PairSource::Kind k) {
  switch (k) {
    case PairSource::Kind::kRandom: return "random";
    case PairSource::Kind::kFile: return "file";
    case PairSource::Kind::kHarden: return "harden";
    case PairSource::Kind::kPlanted: return "planted";
  }
  return "?";
}

std::string_view Name(Analysis a) {
  switch (a) {
    case Analysis::kSubgroups: return "subgroups";
    case Analysis::kGaps: return "gaps";
    case Analysis::kAnova: return "anova";
    case Analysis::kLogit: return "logit";
    case Analysis::kBalance: return "balance";
    case Analysis::kPose: return "pose";
    case Analysis::kDispersion: return "dispersion";
  }
  return "?";
}

bool AuditConfig::Has(Analysis a) const {
  return std::find(analyses.begin(), analyses.end(), a) != analyses.end();
}

Scenario ParseScenario(const json& j) {
  Fields f(j, "scenario");
  Scenario s;
  s.seed = f.Opt<uint64_t>("seed").value_or(s.seed);
  s.dim = f.Opt<std::size_t>("dim").value_or(s.dim);
  s.n_identities = f.Opt<std::size_t>("n_identities").value_or(s.n_identities);
  s.images_per_identity = f.Opt<std::size_t>("images_per_identity").value_or(s.images_per_identity);
  if (const json* v = f.Get("gender_p")) s.gender_p = ParseProportions<2>(v, f.Key("gender_p"));
  if (const json* v = f.Get("ethnicity_p")) {
    s.ethnicity_p = ParseProportions<4>(v, f.Key("ethnicity_p"));
  }
  if (const json* v = f.Get("age_p")) s.age_p = ParseProportions<3>(v, f.Key("age_p"));
  s.identity_spread = f.Opt<double>("identity_spread").value_or(s.identity_spread);
  s.image_spread = f.Opt<double>("image_spread").value_or(s.image_spread);
  if (const json* v = f.Get("pose")) {
    Fields pf(*v, f.Key("pose"));
    const char* axes[] = {"pitch", "yaw", "roll"};
    for (std::size_t i = 0; i < 3; ++i) {
      const json* a = pf.Get(axes[i]);
      if (a == nullptr) continue;
      Fields af(*a, pf.Key(axes[i]));
      if (auto shape = af.Opt<std::string>("shape")) {
        if (*shape == "normal") {
          s.pose[i].shape = PoseShape::kNormal;
        } else if (*shape == "laplace") {
          s.pose[i].shape = PoseShape::kLaplace;
        } else {
          Bad(af.Key("shape"), "expected normal or laplace");
        }
      }
      s.pose[i].scale = af.Opt<double>("scale").value_or(s.pose[i].scale);
      af.Finish();
    }
    pf.Finish();
  }
  s.n_pos = f.Opt<std::size_t>("n_pos").value_or(s.n_pos);
  s.n_neg = f.Opt<std::size_t>("n_neg").value_or(s.n_neg);
  s.pos_mean = f.Opt<double>("pos_mean").value_or(s.pos_mean);
  s.neg_mean = f.Opt<double>("neg_mean").value_or(s.neg_mean);
  s.dist_sd = f.Opt<double>("dist_sd").value_or(s.dist_sd);
  if (auto mode = f.Opt<std::string>("pair_mode")) {
    if (*mode == "hard") {
      s.pair_mode = PairMode::kHard;
    } else if (*mode == "independent") {
      s.pair_mode = PairMode::kIndependent;
    } else {
      Bad(f.Key("pair_mode"), "expected hard or independent");
    }
  }
  if (const json* v = f.Get("effects")) {
    if (!v->is_array()) Bad(f.Key("effects"), "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      Fields ef((*v)[i], f.Key("effects[" + std::to_string(i) + "]"));
      PlantedEffect e;
      const auto attr = ef.Req<std::string>("attribute");
      auto parsed = ParseAttribute(attr);
      if (!parsed) Bad(ef.Key("attribute"), "unknown attribute '" + attr + "'");
      e.attribute = *parsed;
      e.level = ef.Req<std::string>("level");
      e.pos_shift = ef.Opt<double>("pos_shift").value_or(0.0);
      e.neg_shift = ef.Opt<double>("neg_shift").value_or(0.0);
      e.fpr_lift = ef.Opt<double>("fpr_lift").value_or(0.0);
      e.tpr_drop = ef.Opt<double>("tpr_drop").value_or(0.0);
      e.spread = ef.Opt<double>("spread");
      e.pose_spread = ef.Opt<double>("pose_spread").value_or(1.0);
      ef.Finish();
      s.effects.push_back(e);
    }
  }
  f.Finish();
  ValidateScenario(s);
  return s;
}

json ScenarioToJson(const Scenario& s) {
  json j;
  j["seed"] = s.seed;
  j["dim"] = s.dim;
  j["n_identities"] = s.n_identities;
  j["images_per_identity"] = s.images_per_identity;
  j["gender_p"] = s.gender_p;
  j["ethnicity_p"] = s.ethnicity_p;
  j["age_p"] = s.age_p;
  j["identity_spread"] = s.identity_spread;
  j["image_spread"] = s.image_spread;
  const char* axes[] = {"pitch", "yaw", "roll"};
  for (std::size_t i = 0; i < 3; ++i) {
    j["pose"][axes[i]] = {{"shape", ShapeName(s.pose[i].shape)}, {"scale", s.pose[i].scale}};
  }
  j["n_pos"] = s.n_pos;
  j["n_neg"] = s.n_neg;
  j["pos_mean"] = s.pos_mean;
  j["neg_mean"] = s.neg_mean;
  j["dist_sd"] = s.dist_sd;
  j["pair_mode"] = s.pair_mode == PairMode::kHard ? "hard" : "independent";
  j["effects"] = json::array();
  for (const auto& e : s.effects) {
    json ej = {{"attribute", Name(e.attribute)}, {"level", e.level},
               {"pos_shift", e.pos_shift},       {"neg_shift", e.neg_shift},
               {"fpr_lift", e.fpr_lift},         {"tpr_drop", e.tpr_drop},
               {"pose_spread", e.pose_spread}};
    if (e.spread) ej["spread"] = *e.spread;
    j["effects"].push_back(ej);
  }
  return j;
}

AuditConfig ParseConfig(const json& j, const std::string& base_dir) {
  Fields f(j, "");
  AuditConfig c;

  if (const json* v = f.Get("scenario")) c.scenario = ParseScenario(*v);
  if (const json* v = f.Get("corpus")) {
    Fields cf(*v, "corpus");
    c.corpus_name = cf.Opt<std::string>("name").value_or(c.corpus_name);
    c.metadata = Resolve(base_dir, cf.Req<std::string>("metadata"));
    const json* e = cf.Get("embeddings");
    if (e == nullptr) Bad("corpus.embeddings", "missing");
    if (e->is_string()) {
      c.models.push_back({"model", Resolve(base_dir, e->get<std::string>())});
    } else if (e->is_array() && !e->empty()) {
      for (std::size_t i = 0; i < e->size(); ++i) {
        Fields mf((*e)[i], "corpus.embeddings[" + std::to_string(i) + "]");
        ModelSource m{mf.Req<std::string>("name"), Resolve(base_dir, mf.Req<std::string>("path"))};
        mf.Finish();
        for (const auto& other : c.models) {
          if (other.name == m.name) Bad(mf.Key("name"), "duplicate model name '" + m.name + "'");
        }
        if (m.name.empty()) Bad(mf.Key("name"), "empty model name");
        c.models.push_back(m);
      }
    } else {
      Bad("corpus.embeddings", "expected a path or a nonempty array of {name, path}");
    }
    cf.Finish();
  }
  if (c.scenario && !c.models.empty()) Bad("scenario", "give either corpus or scenario, not both");
  if (c.scenario) c.models.push_back({"synthetic", ""});

  if (const json* v = f.Get("pairs")) {
    c.pairs = ParsePairSource(*v, "pairs", base_dir);
  } else {
    c.pairs.kind = c.scenario ? PairSource::Kind::kPlanted : PairSource::Kind::kRandom;
  }
  for (const PairSource* p = &c.pairs; p != nullptr; p = p->base.get()) {
    if (p->kind == PairSource::Kind::kPlanted && !c.scenario) {
      Bad("pairs.source", "planted pairs need a scenario");
    }
  }

  if (const json* v = f.Get("threshold")) {
    Fields tf(*v, "threshold");
    const auto mode = tf.Opt<std::string>("mode").value_or("global");
    if (mode == "global") {
      c.threshold.mode = ThresholdMode::kGlobal;
    } else if (mode == "kfold") {
      c.threshold.mode = ThresholdMode::kKFold;
    } else {
      Bad("threshold.mode", "expected global or kfold");
    }
    c.threshold.k = tf.Opt<std::size_t>("k").value_or(c.threshold.k);
    if (c.threshold.k < 2) Bad("threshold.k", "must be >= 2");
    tf.Finish();
  }
  if (auto r = f.Opt<std::string>("restrict")) {
    auto parsed = ParseRestrict(*r);
    if (!parsed) Bad("restrict", "expected all, hard or soft");
    c.restrict = *parsed;
  }
  if (const json* v = f.Get("analyses")) {
    c.analyses = ParseList<Analysis>(v, "analyses", ParseAnalysis);
  } else {
    c.analyses = {Analysis::kSubgroups, Analysis::kGaps, Analysis::kAnova, Analysis::kLogit};
  }
  if (c.analyses.empty()) Bad("analyses", "must not be empty");
  if (const json* v = f.Get("attributes")) {
    c.attributes = ParseList<Attribute>(v, "attributes", ParseAttribute);
    if (c.attributes.empty()) Bad("attributes", "must not be empty");
  }
  if (const json* v = f.Get("gap_metrics")) {
    c.gap_metrics = ParseList<MetricName>(v, "gap_metrics", ParseMetricName);
    if (c.gap_metrics.empty()) Bad("gap_metrics", "must not be empty");
  }
  c.noise_bound = f.Opt<double>("noise_bound").value_or(c.noise_bound);
  if (!(c.noise_bound > 0)) Bad("noise_bound", "must be positive");
  if (const json* v = f.Get("anova_terms")) c.anova_terms = ParseList<Term>(v, "anova_terms", ParseTerm);
  if (const json* v = f.Get("logit_terms")) c.logit_terms = ParseList<Term>(v, "logit_terms", ParseTerm);
  for (const auto* terms : {&c.anova_terms, &c.logit_terms}) {
    if (std::find(terms->begin(), terms->end(), Term::kDataset) != terms->end()) {
      Bad("terms", "the dataset term is added by pool_datasets");
    }
  }
  c.pool_datasets = f.Opt<bool>("pool_datasets").value_or(false);
  if (const json* v = f.Get("balance_datasets")) {
    if (!v->is_array()) Bad("balance_datasets", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      Fields bf((*v)[i], "balance_datasets[" + std::to_string(i) + "]");
      c.balance_datasets.push_back(
          {bf.Req<std::string>("name"), Resolve(base_dir, bf.Req<std::string>("metadata"))});
      bf.Finish();
    }
  }
  if (auto r = f.Opt<std::string>("report")) c.report = Resolve(base_dir, *r);
  c.seed = f.Opt<uint64_t>("seed").value_or(0);
  c.threads = f.Opt<std::size_t>("threads").value_or(1);
  if (c.threads == 0) Bad("threads", "must be >= 1");
  c.out = Resolve(base_dir, f.Opt<std::string>("out").value_or("out"));
  c.timing = f.Opt<bool>("timing").value_or(false);
  f.Finish();

  if (c.models.empty()) Bad("corpus", "missing (or give a scenario)");
  return c;
}

AuditConfig LoadConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  return ParseConfig(j, std::filesystem::path(path).parent_path().string());
}

void CheckInputsExist(const AuditConfig& c) {
  auto need = [](const std::string& key, const std::string& path) {
    if (!path.empty() && !std::filesystem::is_regular_file(path)) {
      Bad(key, "file not found: " + path);
    }
  };
  if (!c.scenario) {
    need("corpus.metadata", c.metadata);
    for (const auto& m : c.models) need("corpus.embeddings", m.path);
  }
  for (const PairSource* p = &c.pairs; p != nullptr; p = p->base.get()) {
    if (p->kind == PairSource::Kind::kFile) need("pairs.path", p->path);
  }
  for (const auto& d : c.balance_datasets) need("balance_datasets.metadata", d.metadata);
}

json ConfigEcho(const AuditConfig& c) {
  json j;
  if (c.scenario) {
    j["scenario"] = ScenarioToJson(*c.scenario);
  } else {
    j["corpus"]["name"] = c.corpus_name;
    j["corpus"]["metadata"] = c.metadata;
    j["corpus"]["embeddings"] = json::array();
    for (const auto& m : c.models) {
      j["corpus"]["embeddings"].push_back({{"name", m.name}, {"path", m.path}});
    }
  }
  j["pairs"] = PairSourceToJson(c.pairs);
  j["threshold"] = {{"mode", c.threshold.mode == ThresholdMode::kGlobal ? "global" : "kfold"},
                    {"k", c.threshold.k}};
  j["restrict"] = Name(c.restrict);
  j["analyses"] = json::array();
  for (auto a : c.analyses) j["analyses"].push_back(Name(a));
  j["attributes"] = json::array();
  for (auto a : c.attributes) j["attributes"].push_back(Name(a));
  j["gap_metrics"] = json::array();
  for (auto m : c.gap_metrics) j["gap_metrics"].push_back(Name(m));
  j["noise_bound"] = c.noise_bound;
  j["anova_terms"] = json::array();
  for (auto t : c.anova_terms) j["anova_terms"].push_back(Name(t));
  j["logit_terms"] = json::array();
  for (auto t : c.logit_terms) j["logit_terms"].push_back(Name(t));
  j["pool_datasets"] = c.pool_datasets;
  j["balance_datasets"] = json::array();
  for (const auto& d : c.balance_datasets) {
    j["balance_datasets"].push_back({{"name", d.name}, {"metadata", d.metadata}});
  }
  j["seed"] = c.seed;
  return j;
}

}  // namespace fairbench
