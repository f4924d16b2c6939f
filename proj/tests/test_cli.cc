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

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "json.hpp"

#include "fairbench/audit.h"
#include "fairbench/config.h"
#include "fairbench/error.h"
#include "fairbench/render.h"
#include "fairbench/report.h"
#include "oracles.h"

#ifndef FAIRBENCH_BIN
#error "FAIRBENCH_BIN must name the CLI binary"
#endif

namespace fairbench {
namespace {

using nlohmann::json;

json ScenarioConfig() {
  return json::parse(R"({
    "scenario": {
      "seed": 3, "dim": 16, "n_identities": 120, "images_per_identity": 3,
      "ethnicity_p": [0.3, 0.3, 0.2, 0.2],
      "n_pos": 1500, "n_neg": 1500,
      "effects": [{"attribute": "ethnicity", "level": "Indian", "fpr_lift": 0.1}]
    },
    "analyses": ["subgroups", "gaps", "anova", "logit", "balance", "pose", "dispersion"],
    "gap_metrics": ["tnr", "fpr"],
    "seed": 11
  })");
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Dump(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::string ConfigError(const json& j) {
  try {
    ParseConfig(j);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
    return e.what();
  }
  ADD_FAILURE() << "config accepted: " << j.dump();
  return "";
}

TEST(Config, UnknownKeysAreNamed) {
  auto j = ScenarioConfig();
  j["thresholds"] = 1;
  EXPECT_NE(ConfigError(j).find("thresholds"), std::string::npos);
  j = ScenarioConfig();
  j["scenario"]["effects"][0]["lift"] = 0.1;
  EXPECT_NE(ConfigError(j).find("lift"), std::string::npos);
  j = ScenarioConfig();
  j["analyses"].push_back("everything");
  EXPECT_NE(ConfigError(j).find("everything"), std::string::npos);
  j = ScenarioConfig();
  j["threads"] = 0;
  ConfigError(j);
  j = ScenarioConfig();
  j["logit_terms"] = {"dataset"};
  ConfigError(j);
  j = ScenarioConfig();
  j["seed"] = -1;
  ConfigError(j);
  EXPECT_NE(ConfigError(json::parse(R"({"pairs": {"source": "random", "n_pos": 1, "n_neg": 1}})")).find("corpus"),
            std::string::npos);
}

TEST(Config, DefaultsAndEcho) {
  const auto c = ParseConfig(ScenarioConfig());
  EXPECT_EQ(c.pairs.kind, PairSource::Kind::kPlanted);
  ASSERT_EQ(c.models.size(), 1u);
  EXPECT_EQ(c.models[0].name, "synthetic");
  EXPECT_TRUE(c.Has(Analysis::kDispersion));
  EXPECT_EQ(c.threads, 1u);
  const json echo = ConfigEcho(c);
  EXPECT_FALSE(echo.contains("threads"));
  EXPECT_FALSE(echo.contains("out"));
  // Echo round trips through the parser.
  EXPECT_EQ(ConfigEcho(ParseConfig(echo)), echo);
  // Scenario echo round trips too.
  EXPECT_EQ(ScenarioToJson(ParseScenario(ScenarioToJson(*c.scenario))), ScenarioToJson(*c.scenario));
}

TEST(Report, CanonicalJson) {
  json j;
  j["b"] = 0.1;
  j["a"] = json::array({1, 2.5, std::nan(""), "x"});
  j["c"] = json::object();
  EXPECT_EQ(CanonicalJson(j),
            "{\n  \"a\": [\n    1,\n    2.5,\n    null,\n    \"x\"\n  ],\n"
            "  \"b\": 0.10000000000000001,\n  \"c\": {}\n}\n");
  EXPECT_EQ(CanonicalJson(json::parse(CanonicalJson(j))), CanonicalJson(j));
  EXPECT_EQ(json::parse(ErrorJson("Io", "nope")), json::parse(R"({"error":{"code":"Io","message":"nope"}})"));
}

TEST(Audit, ReportShapeAndRender) {
  const auto result = RunAudit(ParseConfig(ScenarioConfig()));
  const json& r = result.report;
  ASSERT_TRUE(r["models"].contains("synthetic"));
  const json& m = r["models"]["synthetic"];
  EXPECT_EQ(m["n_pairs"], 3000);
  EXPECT_EQ(m["gaps"]["ethnicity"]["tnr"]["levels"].size(), 4u);
  EXPECT_TRUE(m["logit"]["fpr"]["converged"].get<bool>());
  EXPECT_EQ(r["corpus"]["images"], 120 * 3 + 2 * 3000);
  EXPECT_TRUE(result.tables.contains("balance.csv"));
  EXPECT_TRUE(result.tables.contains("regression_synthetic_logit_fpr.csv"));
  EXPECT_FALSE(r.contains("timing"));

  const std::string svg = RenderGapSvg(r, "ethnicity");
  // Two panels (tnr, fpr), four levels each.
  std::regex cell(R"(<rect class="cell")");
  EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), cell), std::sregex_iterator()), 32);
  std::regex value(R"re(<text class="value" data-row="(\d+)" data-col="(\d+)"[^>]*>([^<]*)</text>)re");
  std::vector<std::map<std::pair<int, int>, std::string>> panels(1);
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), value); it != std::sregex_iterator(); ++it) {
    const std::pair<int, int> key(std::stoi((*it)[1]), std::stoi((*it)[2]));
    if (panels.back().contains(key)) panels.emplace_back();
    panels.back()[key] = (*it)[3];
  }
  ASSERT_EQ(panels.size(), 2u);
  for (auto& labels : panels) {
    ASSERT_EQ(labels.size(), 16u);
    for (const auto& [key, text] : labels) {
      const std::string mirror = labels[{key.second, key.first}];
      if (key.first == key.second) {
        EXPECT_EQ(text, "0.000");
      } else if (text == "0.000") {
        EXPECT_EQ(mirror, "0.000");
      } else {
        EXPECT_EQ(text[0] == '-' ? text.substr(1) : "-" + text, mirror);
      }
    }
  }
  const auto files = RenderReport(r);
  EXPECT_TRUE(files.contains("anova.svg"));
  EXPECT_TRUE(files.contains("gaps_ethnicity.svg"));
}

std::string RunCapture(const std::string& args, const std::string& env, int* status) {
  testing::TempDir dir("cap");
  const std::string err = dir / "stderr";
  const std::string cmd = env + " " FAIRBENCH_BIN " " + args + " > /dev/null 2> " + err;
  *status = WEXITSTATUS(std::system(cmd.c_str()));
  return Slurp(err);
}

TEST(Cli, AuditIsByteIdenticalAcrossThreads) {
  testing::TempDir dir("cli");
  Dump(dir / "cfg.json", ScenarioConfig().dump());
  int st = 0;
  RunCapture("audit --config " + dir / "cfg.json" + " --threads 1 --out " + dir / "a", "", &st);
  ASSERT_EQ(st, 0);
  RunCapture("audit --config " + dir / "cfg.json" + " --threads 4 --out " + dir / "b", "", &st);
  ASSERT_EQ(st, 0);
  RunCapture("audit --config " + dir / "cfg.json" + " --out " + dir / "c", "FAIRBENCH_THREADS=3", &st);
  ASSERT_EQ(st, 0);
  const std::string a = Slurp(dir / "a/report.json");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, Slurp(dir / "b/report.json"));
  EXPECT_EQ(a, Slurp(dir / "c/report.json"));
  EXPECT_EQ(Slurp(dir / "a/balance.csv"), Slurp(dir / "b/balance.csv"));
  EXPECT_EQ(CanonicalJson(json::parse(a)), a);

  RunCapture("render --config " + dir / "cfg.json" + " --out " + dir / "a", "", &st);
  ASSERT_EQ(st, 0);
  EXPECT_NE(Slurp(dir / "a/gaps_ethnicity.svg").find("<svg"), std::string::npos);
}

TEST(Cli, ErrorsAreJsonOnStderr) {
  testing::TempDir dir("err");
  auto j = ScenarioConfig();
  j["bogus"] = true;
  Dump(dir / "bad.json", j.dump());
  int st = 0;
  std::string err = RunCapture("audit --config " + dir / "bad.json" + " --out " + dir / "o", "", &st);
  EXPECT_EQ(st, 1);
  json e = json::parse(err);
  EXPECT_EQ(e["error"]["code"], "InvalidConfig");
  EXPECT_NE(e["error"]["message"].get<std::string>().find("bogus"), std::string::npos);

  err = RunCapture("audit --config " + dir / "missing.json", "", &st);
  EXPECT_EQ(st, 1);
  EXPECT_EQ(json::parse(err)["error"]["code"], "Io");

  Dump(dir / "good.json", ScenarioConfig().dump());
  err = RunCapture("validate --config " + dir / "good.json", "FAIRBENCH_THREADS=0", &st);
  EXPECT_EQ(st, 1);
  EXPECT_EQ(json::parse(err)["error"]["code"], "InvalidConfig");

  RunCapture("audit --nope", "", &st);
  EXPECT_EQ(st, 2);
}

TEST(Cli, SynthWritesLoadableCorpus) {
  testing::TempDir dir("synth");
  Dump(dir / "cfg.json", ScenarioConfig().dump());
  int st = 0;
  RunCapture("synth --config " + dir / "cfg.json" + " --out " + dir / "s", "", &st);
  ASSERT_EQ(st, 0);
  const Corpus c = LoadCorpus(dir / "s/embeddings.bin", dir / "s/metadata.csv");
  EXPECT_EQ(c.images().size(), 120u * 3 + 6000);
  EXPECT_EQ(ReadPairs(dir / "s/pairs.csv").size(), 3000u);
  const json truth = json::parse(Slurp(dir / "s/truth.json"));
  EXPECT_EQ(truth["subgroups"][0]["level"], "Indian");

  // The written files feed a file-based audit.
  json cfg;
  cfg["corpus"] = {{"metadata", dir / "s/metadata.csv"}, {"embeddings", dir / "s/embeddings.bin"}};
  cfg["pairs"] = {{"source", "file"}, {"path", dir / "s/pairs.csv"}};
  Dump(dir / "files.json", cfg.dump());
  RunCapture("audit --config " + dir / "files.json" + " --out " + dir / "f", "", &st);
  ASSERT_EQ(st, 0);
  EXPECT_EQ(json::parse(Slurp(dir / "f/report.json"))["models"]["model"]["n_pairs"], 3000);
}

}  // namespace
}  // namespace fairbench
