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

#ifndef FAIRBENCH_AUDIT_H_
#define FAIRBENCH_AUDIT_H_

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fairbench/config.h"
#include "fairbench/corpus.h"
#include "fairbench/pairs.h"
#include "fairbench/synth.h"

namespace fairbench {

struct AuditInputs {
  Corpus corpus;  // metadata with the first model's embeddings
  std::vector<std::pair<std::string, EmbeddingSet>> models;
  std::optional<PairSet> planted;
  std::optional<GroundTruth> truth;
};

// Reads (or generates) the corpus and every model's embeddings. Embeddings
// are normalized on load.
AuditInputs LoadInputs(const AuditConfig& config);

// Builds the configured pair source and labels it against the corpus.
PairSet BuildPairSet(const AuditConfig& config, const AuditInputs& inputs);

struct AuditResult {
  nlohmann::json report;
  std::map<std::string, std::string> tables;  // file name -> CSV contents
};

AuditResult RunAudit(const AuditConfig& config);
AuditResult RunAudit(const AuditConfig& config, const AuditInputs& inputs);

// Writes the tables, then report.json, all under config.out.
void WriteAudit(const AuditConfig& config, const AuditResult& result);

// Table-1-style balance scores, rows g/e/a/p and one column per dataset.
nlohmann::json BalanceReport(const AuditConfig& config, const AuditInputs& inputs);
std::string BalanceCsv(const nlohmann::json& balance);

// Pose thresholds and per-image classes of the corpus.
nlohmann::json PoseReport(const std::vector<ImageRecord>& images);
std::string PoseCsv(const std::vector<ImageRecord>& images);

}  // namespace fairbench

#endif  // FAIRBENCH_AUDIT_H_
