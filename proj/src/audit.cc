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

#include "fairbench/audit.h"

#include <boost/version.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <filesystem>

#include "fairbench/balance.h"
#include "fairbench/error.h"
#include "fairbench/poseclass.h"
#include "fairbench/report.h"
#include "fairbench/stats.h"
#include "fairbench/text.h"
#include "fairbench/verify.h"

#ifndef FAIRBENCH_VERSION
#define FAIRBENCH_VERSION "dev"
#endif

namespace fairbench {

namespace {

using nlohmann::json;

constexpr int kReportFormat = 1;

json Versions() {
  json j;
  j["fairbench"] = FAIRBENCH_VERSION;
  j["report_format"] = kReportFormat;
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
               "." + std::to_string(EIGEN_MINOR_VERSION);
  j["boost"] = std::to_string(BOOST_VERSION / 100000) + "." +
               std::to_string(BOOST_VERSION / 100 % 1000) + "." + std::to_string(BOOST_VERSION % 100);
  return j;
}

json OptNumber(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json SubgroupJson(const SubgroupMetrics& m) {
  return {{"key", m.key},
          {"n", m.n},
          {"n_pos", m.n_pos},
          {"n_neg", m.n_neg},
          {"true_pos", m.true_pos},
          {"false_pos", m.false_pos},
          {"correct", m.correct},
          {"accuracy", OptNumber(m.accuracy)},
          {"tpr", OptNumber(m.tpr)},
          {"fpr", OptNumber(m.fpr)},
          {"tnr", OptNumber(m.tnr)}};
}

json GapJson(const GapMatrix& g, double noise_bound) {
  const double z = g.MaxAbsZ();
  return {{"attribute", g.attribute},
          {"metric", Name(g.metric)},
          {"levels", g.levels},
          {"values", g.values},
          {"standard_errors", g.standard_errors},
          {"excluded", g.excluded},
          {"max_abs_z", z},
          {"within_noise", z <= noise_bound}};
}

json ThresholdJson(const ThresholdResult& t) {
  json j = {{"mode", t.mode == ThresholdMode::kGlobal ? "global" : "kfold"},
            {"threshold", t.threshold},
            {"accuracy", t.accuracy}};
  j["folds"] = json::array();
  for (const auto& f : t.per_fold) {
    j["folds"].push_back({{"threshold", f.threshold}, {"accuracy", f.accuracy}, {"n_test", f.n_test}});
  }
  return j;
}

json CoefficientsJson(const std::vector<CoefficientRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"term", r.term},
                   {"estimate", r.estimate},
                   {"std_error", r.std_error},
                   {"statistic", r.statistic},
                   {"p", r.p_value}});
  }
  return out;
}

json DesignJson(const DesignMatrix& d) {
  return {{"n", d.x.rows()},
          {"columns", d.column_names},
          {"dropped_rows", d.dropped_rows},
          {"pruned_terms", d.pruned_terms}};
}

std::string Csv(const std::optional<double>& v) { return v ? FormatDouble(*v) : ""; }

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string RegressionCsv(const std::vector<CoefficientRow>& coefs, const std::vector<AnovaRow>* anova) {
  std::string out = "term,estimate,std_error,z,p,eta_squared\n";
  for (const auto& r : coefs) {
    out += CsvField(r.term) + "," + Csv(r.estimate) + "," + Csv(r.std_error) + "," +
           Csv(r.statistic) + "," + Csv(r.p_value) + ",\n";
  }
  if (anova != nullptr) {
    for (const auto& r : *anova) {
      out += CsvField(r.term) + ",,,," + Csv(r.p_value) + "," + Csv(r.eta_squared) + "\n";
    }
  }
  return out;
}

PairSet Subset(const PairSet& set, bool positive) {
  PairSet out;
  for (const auto& p : set.pairs) {
    if (p.positive == positive) out.pairs.push_back(p);
  }
  return out;
}

struct Fitted {
  json report;
  std::string csv;
};

Fitted AnovaOn(const DesignMatrix& design) {
  const OlsFit fit = OlsAnova(design);
  json j = DesignJson(design);
  j["coefficients"] = CoefficientsJson(fit.coefficients);
  j["terms"] = json::array();
  for (const auto& r : fit.anova) {
    j["terms"].push_back({{"term", r.term},
                          {"df", r.df},
                          {"sum_of_squares", r.sum_of_squares},
                          {"eta_squared", r.eta_squared},
                          {"f", r.f_statistic},
                          {"p", r.p_value}});
  }
  j["r_squared"] = fit.r_squared;
  j["ss_total"] = fit.ss_total;
  j["ss_residual"] = fit.ss_residual;
  j["df_residual"] = fit.df_residual;
  j["diagnostics"] = {{"jarque_bera", fit.diagnostics.normality_stat},
                      {"jarque_bera_p", fit.diagnostics.normality_p},
                      {"breusch_pagan", fit.diagnostics.homosked_stat},
                      {"breusch_pagan_p", fit.diagnostics.homosked_p}};
  return {j, RegressionCsv(fit.coefficients, &fit.anova)};
}

// `flip` turns the correctness indicator into an error indicator, so the fit
// on negatives models false positives directly.
Fitted LogitOn(DesignMatrix design, bool flip) {
  if (flip) design.y = Eigen::VectorXd::Ones(design.y.size()) - design.y;
  const LogitFit fit = FitLogit(design);
  json j = DesignJson(design);
  j["outcome"] = flip ? "false_positive" : "true_positive";
  j["coefficients"] = CoefficientsJson(fit.coefficients);
  j["log_likelihood"] = fit.log_likelihood;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["ridge_applied"] = fit.ridge_applied;
  j["marginal_effects"] = json::array();
  for (const auto& m : MarginalEffects(fit, design)) {
    j["marginal_effects"].push_back({{"term", m.term},
                                     {"level", m.level},
                                     {"reference", m.reference},
                                     {"effect", m.effect},
                                     {"p", m.p_value},
                                     {"significant", m.significant}});
  }
  return {j, RegressionCsv(fit.coefficients, nullptr)};
}

// ANOVA of the pair angle and logits of the decision outcome, positives and
// negatives separately.
void Regressions(const AuditConfig& config, const std::string& label,
                 const std::function<DesignMatrix(const PairSet*, const DesignOptions&)>& design,
                 const PairSet& positives, const PairSet& negatives, json& out,
                 std::map<std::string, std::string>& tables) {
  if (config.Has(Analysis::kAnova)) {
    DesignOptions o{Target::kAngle, config.anova_terms, 0.0};
    for (auto [name, set] : {std::pair{"positive", &positives}, std::pair{"negative", &negatives}}) {
      Fitted f = AnovaOn(design(set, o));
      out["anova"][name] = std::move(f.report);
      tables["regression_" + label + "_anova_" + name + ".csv"] = std::move(f.csv);
    }
  }
  if (config.Has(Analysis::kLogit)) {
    DesignOptions o{Target::kCorrect, config.logit_terms, 0.0};
    for (auto [name, set, flip] :
         {std::tuple{"tpr", &positives, false}, std::tuple{"fpr", &negatives, true}}) {
      Fitted f = LogitOn(design(set, o), flip);
      out["logit"][name] = std::move(f.report);
      tables["regression_" + label + "_logit_" + name + ".csv"] = std::move(f.csv);
    }
  }
}

json DispersionJson(const std::vector<DispersionGroup>& groups) {
  json out = json::array();
  for (const auto& g : groups) {
    out.push_back({{"level", g.level},
                   {"n", g.image_ids.size()},
                   {"mean", g.summary.mean},
                   {"median", g.summary.median},
                   {"q10", g.summary.q10},
                   {"q90", g.summary.q90}});
  }
  return out;
}

json AxisJson(const AxisThresholds& t) {
  return {{"axis", Name(t.axis)}, {"t_lo", t.t_lo},       {"t_hi", t.t_hi}, {"n", t.n},
          {"low", t.low},         {"neutral", t.neutral}, {"high", t.high}};
}

std::vector<ImageRecord> Posed(const std::vector<ImageRecord>& images) {
  std::vector<ImageRecord> out;
  for (const auto& im : images) {
    if (im.pose) out.push_back(im);
  }
  return out;
}

json CountsJson(const std::map<std::string, std::size_t>& counts) {
  json j = json::object();
  for (const auto& [k, v] : counts) j[k] = v;
  return j;
}

json BalanceOf(const std::vector<ImageRecord>& images) {
  json j;
  const std::pair<const char*, Attribute> attrs[] = {
      {"g", Attribute::kGender}, {"e", Attribute::kEthnicity}, {"a", Attribute::kAge}};
  for (const auto& [key, attr] : attrs) {
    const auto score = ComputeBalanceScore(LevelCounts(images, attr), std::string(Name(attr)));
    j[key] = {{"score", score.score}, {"counts", CountsJson(score.class_counts)}};
  }
  const auto posed = Posed(images);
  if (posed.size() >= 10) {
    const auto score = ComputeBalanceScore(PoseClassCounts(posed, FitPoseThresholds(posed)), "pose");
    j["p"] = {{"score", score.score}, {"counts", CountsJson(score.class_counts)}};
  } else {
    j["p"] = nullptr;
  }
  return j;
}

}  // namespace

AuditInputs LoadInputs(const AuditConfig& config) {
  AuditInputs in;
  if (config.scenario) {
    SynthOutput synth = Generate(*config.scenario);
    in.models.emplace_back(config.models.front().name, synth.corpus.embeddings());
    in.corpus = std::move(synth.corpus);
    in.planted = std::move(synth.pairs);
    in.truth = std::move(synth.truth);
    return in;
  }
  auto metadata = ReadMetadata(config.metadata);
  for (const auto& m : config.models) {
    in.models.emplace_back(m.name, Normalize(ReadEmbeddings(m.path)));
  }
  in.corpus = Corpus::Assemble(in.models.front().second, std::move(metadata));
  for (std::size_t i = 1; i < in.models.size(); ++i) {
    in.corpus.WithEmbeddings(in.models[i].second);  // same ids or DanglingId
  }
  return in;
}

namespace {

PairSet BuildSource(const AuditConfig& config, const AuditInputs& inputs, const PairSource& src) {
  PairSet set;
  switch (src.kind) {
    case PairSource::Kind::kRandom:
      set = BuildRandomPairs(inputs.corpus, src.n_pos, src.n_neg, src.seed.value_or(config.seed));
      break;
    case PairSource::Kind::kFile:
      set = ReadPairs(src.path);
      break;
    case PairSource::Kind::kPlanted:
      set = *inputs.planted;
      break;
    case PairSource::Kind::kHarden:
      set = HardenPairs(inputs.corpus, BuildSource(config, inputs, *src.base), config.threads);
      break;
  }
  if (src.shuffle) set = ShufflePairs(set, config.seed);
  return set;
}

}  // namespace

PairSet BuildPairSet(const AuditConfig& config, const AuditInputs& inputs) {
  return LabelPairs(inputs.corpus, BuildSource(config, inputs, config.pairs));
}

json PoseReport(const std::vector<ImageRecord>& images) {
  const auto posed = Posed(images);
  const auto thresholds = FitPoseThresholds(posed);
  json j;
  j["n"] = posed.size();
  j["missing"] = images.size() - posed.size();
  j["axes"] = json::array();
  for (const auto& t : thresholds) j["axes"].push_back(AxisJson(t));
  j["class_counts"] = CountsJson(PoseClassCounts(posed, thresholds));
  return j;
}

std::string PoseCsv(const std::vector<ImageRecord>& images) {
  const auto thresholds = FitPoseThresholds(Posed(images));
  std::string out = "image_id,pitch_class,yaw_class,roll_class,pose_class\n";
  for (const auto& im : images) {
    out += std::to_string(im.image_id);
    if (!im.pose) {
      out += ",,,,\n";
      continue;
    }
    const PoseClass c = AssignPoseClass(im.pose, thresholds);
    out += "," + std::to_string(c.i) + "," + std::to_string(c.j) + "," + std::to_string(c.k) +
           ",P" + std::to_string(c.i) + std::to_string(c.j) + std::to_string(c.k) + "\n";
  }
  return out;
}

json BalanceReport(const AuditConfig& config, const AuditInputs& inputs) {
  json j = json::object();
  if (config.balance_datasets.empty()) {
    j[config.corpus_name] = BalanceOf(inputs.corpus.images());
  }
  for (const auto& d : config.balance_datasets) j[d.name] = BalanceOf(ReadMetadata(d.metadata));
  return j;
}

std::string BalanceCsv(const json& balance) {
  std::string out = "attribute";
  for (auto it = balance.begin(); it != balance.end(); ++it) out += "," + CsvField(it.key());
  out += "\n";
  for (const char* row : {"g", "e", "a", "p"}) {
    out += row;
    for (auto it = balance.begin(); it != balance.end(); ++it) {
      const json& cell = it.value()[row];
      out += ",";
      if (!cell.is_null()) out += FormatDouble(cell["score"].get<double>());
    }
    out += "\n";
  }
  return out;
}

AuditResult RunAudit(const AuditConfig& config) { return RunAudit(config, LoadInputs(config)); }

AuditResult RunAudit(const AuditConfig& config, const AuditInputs& inputs) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  json timing;
  auto lap = [&](const std::string& stage) {
    timing[stage] = std::chrono::duration<double>(Clock::now() - start).count();
  };

  AuditResult result;
  json& r = result.report;
  r["config"] = ConfigEcho(config);
  r["versions"] = Versions();
  r["notes"] = {
      "marginal-effect significance is the Wald test of the level's logit coefficient",
      "rates are raw proportions; gaps are row level minus column level"};
  r["corpus"] = {{"images", inputs.corpus.images().size()},
                 {"identities", inputs.corpus.identities().size()},
                 {"dim", inputs.corpus.embeddings().dim()},
                 {"with_pose", Posed(inputs.corpus.images()).size()}};

  const PairSet labeled = BuildPairSet(config, inputs);
  lap("pairs");
  std::size_t hard = 0;
  for (const auto& p : labeled.pairs) hard += p.attributes->hard ? 1 : 0;
  r["pairs"] = {{"source", Name(config.pairs.kind)},
                {"n", labeled.size()},
                {"n_pos", labeled.n_pos()},
                {"n_neg", labeled.n_neg()},
                {"hard", hard},
                {"soft", labeled.size() - hard},
                {"restrict", Name(config.restrict)}};
  r["pairs"]["combos"] = json::object();
  for (Attribute a : config.attributes) {
    r["pairs"]["combos"][std::string(Name(a))] = CountsJson(ComboHistogram(labeled, a));
  }

  std::vector<PairSet> evaluated;
  std::vector<ThresholdResult> thresholds;
  r["models"] = json::object();
  for (const auto& [name, embeddings] : inputs.models) {
    json& m = r["models"][name];
    PairSet pairs = FilterPairs(AttachDistances(embeddings, labeled, config.threads), config.restrict);
    m["n_pairs"] = pairs.size();
    const ThresholdResult t = SelectThreshold(pairs, config.threshold);
    m["threshold"] = ThresholdJson(t);

    if (config.Has(Analysis::kSubgroups) || config.Has(Analysis::kGaps)) {
      for (Attribute a : config.attributes) {
        const std::string attr(Name(a));
        const auto levels = ComputeSubgroupMetrics(pairs, t.threshold, a, Conditioning::kLevel,
                                                   Restrict::kAll);
        if (config.Has(Analysis::kSubgroups)) {
          const auto combos = ComputeSubgroupMetrics(pairs, t.threshold, a, Conditioning::kCombo,
                                                     Restrict::kAll);
          m["subgroups"][attr]["level"] = json::array();
          for (const auto& s : levels) m["subgroups"][attr]["level"].push_back(SubgroupJson(s));
          m["subgroups"][attr]["combo"] = json::array();
          for (const auto& s : combos) m["subgroups"][attr]["combo"].push_back(SubgroupJson(s));
        }
        if (config.Has(Analysis::kGaps)) {
          for (MetricName metric : config.gap_metrics) {
            m["gaps"][attr][std::string(Name(metric))] =
                GapJson(ComputeGapMatrix(levels, metric, attr), config.noise_bound);
          }
        }
      }
    }

    const PairSet positives = Subset(pairs, true);
    const PairSet negatives = Subset(pairs, false);
    const double threshold = t.threshold;
    Regressions(
        config, name,
        [threshold](const PairSet* set, const DesignOptions& o) {
          DesignOptions with = o;
          with.threshold = threshold;
          return BuildDesign(*set, with);
        },
        positives, negatives, m, result.tables);

    if (config.Has(Analysis::kDispersion)) {
      const Corpus corpus = inputs.corpus.WithEmbeddings(embeddings);
      for (Attribute a : config.attributes) {
        m["dispersion"][std::string(Name(a))] =
            DispersionJson(CentroidDispersion(corpus, a, config.seed));
      }
    }
    lap("model." + name);
    evaluated.push_back(std::move(pairs));
    thresholds.push_back(t);
  }

  if (config.pool_datasets && (config.Has(Analysis::kAnova) || config.Has(Analysis::kLogit))) {
    std::vector<PairSet> pos, neg;
    for (const auto& set : evaluated) {
      pos.push_back(Subset(set, true));
      neg.push_back(Subset(set, false));
    }
    auto pooled_design = [&](const PairSet* which, const DesignOptions& o) {
      const auto& parts = which == &pos.front() ? pos : neg;
      std::vector<DatasetPairs> datasets;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        datasets.push_back({inputs.models[i].first, &parts[i], thresholds[i].threshold});
      }
      DesignOptions with = o;
      with.terms.push_back(Term::kDataset);
      return BuildPooledDesign(datasets, with);
    };
    Regressions(config, "pooled", pooled_design, pos.front(), neg.front(), r["pooled"],
                result.tables);
  }

  if (config.Has(Analysis::kBalance)) {
    r["balance"] = BalanceReport(config, inputs);
    result.tables["balance.csv"] = BalanceCsv(r["balance"]);
  }
  if (config.Has(Analysis::kPose)) r["pose"] = PoseReport(inputs.corpus.images());

  r["fairness"] = json::object();
  if (config.Has(Analysis::kGaps)) {
    double worst = 0.0;
    for (const auto& [name, m] : r["models"].items()) {
      for (const auto& [attr, metrics] : m["gaps"].items()) {
        for (const auto& [metric, g] : metrics.items()) {
          const json& z = g["max_abs_z"];
          worst = std::max(worst, z.is_number() ? z.get<double>() : INFINITY);
        }
      }
    }
    r["fairness"] = {{"max_abs_z", worst}, {"within_noise", worst <= config.noise_bound}};
  }

  lap("total");
  if (config.timing) r["timing"] = timing;
  return result;
}

void WriteAudit(const AuditConfig& config, const AuditResult& result) {
  std::filesystem::create_directories(config.out);
  for (const auto& [file, contents] : result.tables) {
    WriteFileAtomic((std::filesystem::path(config.out) / file).string(), contents);
  }
  WriteFileAtomic((std::filesystem::path(config.out) / "report.json").string(),
                  CanonicalJson(result.report));
}

}  // namespace fairbench
