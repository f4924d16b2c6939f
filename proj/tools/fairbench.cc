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

// fairbench command-line entry point.
//
//   fairbench <validate|pairs|audit|balance|pose|synth|render> --config <path>
//             [--threads N] [--out DIR] [--seed S]

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fairbench/audit.h"
#include "fairbench/config.h"
#include "fairbench/error.h"
#include "fairbench/render.h"
#include "fairbench/report.h"
#include "fairbench/text.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fairbench {
namespace {

struct Flags {
  std::string config;
  std::optional<std::size_t> threads;
  std::optional<std::string> out;
  std::optional<uint64_t> seed;
};

AuditConfig Effective(const Flags& flags) {
  AuditConfig c = LoadConfig(flags.config);
  if (const char* env = std::getenv("FAIRBENCH_THREADS"); env != nullptr && *env != '\0') {
    auto n = ParseU64(env);
    if (!n || *n == 0) throw Error(ErrorCode::kInvalidConfig, "FAIRBENCH_THREADS must be >= 1");
    c.threads = *n;
  }
  if (flags.threads) {
    if (*flags.threads == 0) throw Error(ErrorCode::kInvalidConfig, "--threads must be >= 1");
    c.threads = *flags.threads;
  }
  if (flags.out) c.out = *flags.out;
  if (flags.seed) c.seed = *flags.seed;
  CheckInputsExist(c);
  return c;
}

std::string OutPath(const AuditConfig& c, const std::string& name) {
  fs::create_directories(c.out);
  return (fs::path(c.out) / name).string();
}

void CmdValidate(const AuditConfig& c) {
  const AuditInputs in = LoadInputs(c);
  json j;
  j["images"] = in.corpus.images().size();
  j["identities"] = in.corpus.identities().size();
  std::size_t posed = 0;
  for (const auto& im : in.corpus.images()) posed += im.pose ? 1 : 0;
  j["with_pose"] = posed;
  for (const auto& [name, set] : in.models) {
    j["models"][name] = {{"dim", set.dim()}, {"vectors", set.size()}};
  }
  j["status"] = "ok";
  std::cout << CanonicalJson(j);
}

void CmdPairs(const AuditConfig& c) {
  const AuditInputs in = LoadInputs(c);
  const PairSet set = BuildPairSet(c, in);
  WriteFileAtomic(OutPath(c, "pairs.csv"), PairsToCsv(set));
  std::cout << "wrote " << set.size() << " pairs to " << OutPath(c, "pairs.csv") << "\n";
}

void CmdAudit(const AuditConfig& c) {
  const AuditResult result = RunAudit(c);
  WriteAudit(c, result);
  std::cout << "wrote " << OutPath(c, "report.json") << "\n";
}

void CmdBalance(const AuditConfig& c) {
  const AuditInputs in = LoadInputs(c);
  WriteFileAtomic(OutPath(c, "balance.csv"), BalanceCsv(BalanceReport(c, in)));
  std::cout << "wrote " << OutPath(c, "balance.csv") << "\n";
}

void CmdPose(const AuditConfig& c) {
  const AuditInputs in = LoadInputs(c);
  const auto& images = in.corpus.images();
  WriteFileAtomic(OutPath(c, "pose.csv"), PoseCsv(images));
  WriteFileAtomic(OutPath(c, "pose.json"), CanonicalJson(PoseReport(images)));
  std::cout << "wrote " << OutPath(c, "pose.csv") << "\n";
}

void CmdSynth(const AuditConfig& c) {
  if (!c.scenario) throw Error(ErrorCode::kInvalidConfig, "scenario: missing");
  const AuditInputs in = LoadInputs(c);
  WriteCorpus(in.corpus, OutPath(c, "embeddings.bin"), OutPath(c, "metadata.csv"));
  WriteFileAtomic(OutPath(c, "pairs.csv"), PairsToCsv(*in.planted));
  json truth;
  truth["reference_threshold"] = in.truth->reference_threshold;
  truth["baseline_tpr"] = in.truth->baseline_tpr;
  truth["baseline_fpr"] = in.truth->baseline_fpr;
  truth["subgroups"] = json::array();
  for (const auto& s : in.truth->subgroups) {
    truth["subgroups"].push_back({{"attribute", s.attribute},
                                  {"level", s.level},
                                  {"fpr_mix", s.fpr_mix},
                                  {"tpr_mix", s.tpr_mix},
                                  {"expected_tpr", s.expected_tpr},
                                  {"expected_fpr", s.expected_fpr},
                                  {"spread", s.spread}});
  }
  truth["scenario"] = ScenarioToJson(*c.scenario);
  WriteFileAtomic(OutPath(c, "truth.json"), CanonicalJson(truth));
  std::cout << "wrote synthetic corpus to " << c.out << "\n";
}

void CmdRender(const AuditConfig& c) {
  const std::string path = c.report.empty() ? (fs::path(c.out) / "report.json").string() : c.report;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open report " + path);
  json report;
  try {
    report = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedFile, path + ": " + e.what());
  }
  const auto files = RenderReport(report);
  if (files.empty()) throw Error(ErrorCode::kInvalidArgument, "report has nothing to render");
  for (const auto& [name, svg] : files) WriteFileAtomic(OutPath(c, name), svg);
  std::cout << "wrote " << files.size() << " figures to " << c.out << "\n";
}

}  // namespace
}  // namespace fairbench

int main(int argc, char** argv) {
  using namespace fairbench;
  CLI::App app{"Fairness audit of face verification embeddings"};
  app.require_subcommand(1);
  Flags flags;
  void (*action)(const AuditConfig&) = nullptr;
  const std::pair<const char*, void (*)(const AuditConfig&)> commands[] = {
      {"validate", CmdValidate}, {"pairs", CmdPairs}, {"audit", CmdAudit},
      {"balance", CmdBalance},   {"pose", CmdPose},   {"synth", CmdSynth},
      {"render", CmdRender}};
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", flags.config, "JSON config")->required();
    sub->add_option("--threads", flags.threads, "worker threads (default FAIRBENCH_THREADS or 1)");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "top-level seed");
    sub->callback([&action, f = fn] { action = f; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << ErrorJson("InvalidArgument", e.what()) << "\n";
    return 2;
  }
  try {
    action(Effective(flags));
  } catch (const Error& e) {
    std::cerr << ErrorJson(std::string(ErrorCodeName(e.code())), e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << ErrorJson("Internal", e.what()) << "\n";
    return 1;
  }
  return 0;
}
