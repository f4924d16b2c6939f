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

#ifndef FAIRBENCH_CONFIG_H_
#define FAIRBENCH_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairbench/attributes.h"
#include "fairbench/stats.h"
#include "fairbench/synth.h"
#include "fairbench/verify.h"

namespace fairbench {

struct ModelSource {
  std::string name;
  std::string path;
};

struct PairSource {
  enum class Kind { kRandom, kFile, kHarden, kPlanted };
  Kind kind = Kind::kRandom;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::optional<uint64_t> seed;      // random; defaults to the top-level seed
  std::string path;                  // file
  std::shared_ptr<PairSource> base;  // harden
  bool shuffle = false;              // shuffle with the top-level seed after building
};

std::string_view Name(PairSource::Kind k);

enum class Analysis { kSubgroups, kGaps, kAnova, kLogit, kBalance, kPose, kDispersion };

std::string_view Name(Analysis a);

struct BalanceDataset {
  std::string name;
  std::string metadata;
};

// Paths are resolved against the directory holding the config file.
struct AuditConfig {
  std::string corpus_name = "corpus";
  std::string metadata;                 // empty with a scenario
  std::vector<ModelSource> models;      // one entry per embedding file
  std::optional<Scenario> scenario;     // synthetic corpus instead of files
  PairSource pairs;
  ThresholdSpec threshold;
  Restrict restrict = Restrict::kAll;
  std::vector<Analysis> analyses;
  std::vector<Attribute> attributes = {Attribute::kGender, Attribute::kAge, Attribute::kEthnicity};
  std::vector<MetricName> gap_metrics = {MetricName::kTnr};
  double noise_bound = 3.0;
  std::vector<Term> anova_terms = kDefaultTerms;
  std::vector<Term> logit_terms = {Term::kGender, Term::kAge, Term::kEthnicity};
  bool pool_datasets = false;
  std::vector<BalanceDataset> balance_datasets;  // defaults to the corpus itself
  std::string report;                            // render input, defaults to <out>/report.json
  uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out = "out";
  bool timing = false;

  bool Has(Analysis a) const;
};

// Strict parse: unknown keys, wrong types and missing files raise
// kInvalidConfig naming the offending key.
AuditConfig ParseConfig(const nlohmann::json& j, const std::string& base_dir = ".");
AuditConfig LoadConfig(const std::string& path);

// Checks referenced input files exist.
void CheckInputsExist(const AuditConfig& config);

Scenario ParseScenario(const nlohmann::json& j);
nlohmann::json ScenarioToJson(const Scenario& s);

// Effective configuration as echoed in reports. threads, out and timing are
// left out: they cannot change results.
nlohmann::json ConfigEcho(const AuditConfig& config);

}  // namespace fairbench

#endif  // FAIRBENCH_CONFIG_H_
