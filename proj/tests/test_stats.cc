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

#include <cmath>
#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include "fairbench/error.h"
#include "fairbench/stats.h"
#include "oracles.h"

namespace fairbench {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIo;
}

TermColumn Cat(std::string name, std::vector<std::string> levels) {
  return {std::move(name), false, std::move(levels), {}};
}

TermColumn Cont(std::string name, std::vector<double> values) {
  return {std::move(name), true, {}, std::move(values)};
}

Eigen::VectorXd Vec(std::vector<double> v) {
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// x = 0: 3 positives, 1 negative; x = 1: 1 positive, 3 negatives.
DesignMatrix TwoByTwo() {
  return BuildDesignFromColumns({Cat("x", {"0", "0", "0", "0", "1", "1", "1", "1"})},
                                Vec({1, 1, 1, 0, 1, 0, 0, 0}));
}

TEST(Design, Coding) {
  auto d = BuildDesignFromColumns(
      {Cat("gender", {"Male×Male", "Male×Male", "Female×Male"})}, Vec({1, 2, 3}));
  ASSERT_EQ(d.column_names, (std::vector<std::string>{"intercept", "gender[Female×Male]"}));
  EXPECT_EQ(d.groups[0].reference, "Male×Male");

  d = BuildDesignFromColumns({Cat("a", {"x", "x", "x"}), Cat("b", {"p", "q", "r"})}, Vec({1, 2, 3}));
  EXPECT_EQ(d.pruned_terms, (std::vector<std::string>{"a"}));
  EXPECT_EQ(d.x.cols(), 3);  // intercept + 2 dummies of a 3-level term

  // Frequency tie goes to the lexicographically smaller level.
  d = BuildDesignFromColumns({Cat("t", {"b", "a", "b", "a"})}, Vec({1, 2, 3, 4}));
  EXPECT_EQ(d.groups[0].reference, "a");

  EXPECT_EQ(CodeOf([] {
              BuildDesignFromColumns({Cat("a", {"x", "y", "x", "y"}), Cat("b", {"p", "q", "p", "q"})},
                                     Vec({1, 2, 3, 4}));
            }),
            ErrorCode::kRankDeficient);
}

TEST(Design, FromPairs) {
  PairSet s;
  for (int i = 0; i < 6; ++i) {
    VerificationPair p;
    p.positive = i % 2 == 0;
    p.dist = 0.2 * i;
    PairAttributes a;
    a.gender = Combo::Of(i < 4 ? "Male" : "Female", "Male");
    a.age = Combo::Of("Adult", "Adult");
    a.ethnicity = Combo::Of("White", i % 3 == 0 ? "Black" : "White");
    if (i != 5) a.pose_angle_deg = 10.0 * i;
    p.attributes = a;
    s.pairs.push_back(p);
  }
  const auto d = BuildDesign(s, {Target::kAngle, kDefaultTerms, 0.0});
  EXPECT_EQ(d.dropped_rows, 1u);
  EXPECT_EQ(d.pruned_terms, (std::vector<std::string>{"age"}));
  EXPECT_EQ(d.column_names,
            (std::vector<std::string>{"intercept", "gender[Female×Male]", "ethnicity[Black×White]", "pose"}));
  EXPECT_NEAR(d.y[1], 2 * std::asin(0.1) * 180 / M_PI, 1e-12);

  const auto c = BuildDesign(s, {Target::kCorrect, {Term::kGender}, 0.5});
  EXPECT_EQ(c.y, Vec({1, 0, 1, 1, 0, 1}));
  PairSet positives;
  for (const auto& p : s.pairs) {
    if (p.positive) positives.pairs.push_back(p);
  }
  EXPECT_EQ(CodeOf([&] { BuildDesign(positives, {Target::kCorrect, {Term::kGender}, 5.0}); }),
            ErrorCode::kConstantTarget);
}

TEST(Ols, ExactFitAndZeroVariance) {
  auto d = BuildDesignFromColumns({Cat("g", {"a", "a", "b", "b"})}, Vec({1, 1, 3, 3}));
  const auto fit = OlsAnova(d);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(fit.anova[0].eta_squared, 1.0, 1e-12);
  d.y = Vec({2, 2, 2, 2});
  EXPECT_EQ(CodeOf([&] { OlsAnova(d); }), ErrorCode::kZeroVariance);
}

DesignMatrix RandomDesign(std::mt19937_64& gen) {
  for (;;) {
    const std::size_t n = 20 + gen() % 181;
    std::vector<TermColumn> cols;
    std::size_t p = 1;
    const int terms = 1 + static_cast<int>(gen() % 4);
    for (int t = 0; t < terms && p < 10; ++t) {
      if (gen() % 3 == 0) {
        std::vector<double> v(n);
        for (auto& x : v) x = std::normal_distribution<double>(0, 5)(gen);
        cols.push_back(Cont("c" + std::to_string(t), v));
        p += 1;
      } else {
        const std::size_t k = 2 + gen() % std::min<std::size_t>(4, 10 - p);
        std::vector<std::string> v(n);
        for (auto& x : v) x = "L" + std::to_string(gen() % k);
        cols.push_back(Cat("f" + std::to_string(t), v));
        p += k - 1;
      }
    }
    std::vector<double> y(n);
    for (auto& x : y) x = std::normal_distribution<double>(1, 2)(gen);
    try {
      auto d = BuildDesignFromColumns(cols, Vec(y));
      if (d.x.rows() > d.x.cols() && d.x.cols() <= 10) return d;
    } catch (const Error&) {
    }
  }
}

// Sum of eta squared equals R^2; coefficients and sequential SS match
// independent refits.
TEST(Ols, MatchesPseudoinverseOracle) {
  std::mt19937_64 gen(314);
  for (int inst = 0; inst < 200; ++inst) {
    auto d = RandomDesign(gen);
    // Plant effects so R^2 is not just noise.
    const Eigen::VectorXd beta = Eigen::VectorXd::Random(d.x.cols());
    d.y += d.x * beta;
    const auto fit = OlsAnova(d);
    double sum_eta = 0;
    for (const auto& r : fit.anova) sum_eta += r.eta_squared;
    ASSERT_NEAR(sum_eta, fit.r_squared, 1e-10);
    const Eigen::VectorXd oracle = testing::PinvSolve(d.x, d.y);
    for (Eigen::Index c = 0; c < d.x.cols(); ++c) ASSERT_NEAR(fit.beta[c], oracle[c], 1e-9) << inst;
    std::vector<std::vector<Eigen::Index>> groups;
    for (const auto& g : d.groups) groups.push_back(g.columns);
    const auto ss = testing::SequentialSs(d.x, d.y, groups);
    const double sst = (d.y.array() - d.y.mean()).square().sum();
    for (std::size_t g = 0; g < ss.size(); ++g) {
      ASSERT_NEAR(fit.anova[g].sum_of_squares, ss[g], 1e-8 * sst);
      ASSERT_NEAR(fit.anova[g].eta_squared, ss[g] / sst, 1e-10);
    }
    ASSERT_NEAR(fit.residuals.sum(), 0.0, 1e-8);
  }
}

TEST(Ols, PermutationInvariant) {
  std::mt19937_64 gen(5);
  for (int inst = 0; inst < 50; ++inst) {
    auto d = RandomDesign(gen);
    const auto a = OlsAnova(d);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(d.x.rows()));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    DesignMatrix e = d;
    for (std::size_t r = 0; r < perm.size(); ++r) {
      e.x.row(static_cast<Eigen::Index>(r)) = d.x.row(perm[r]);
      e.y[static_cast<Eigen::Index>(r)] = d.y[perm[r]];
    }
    const auto b = OlsAnova(e);
    ASSERT_NEAR(a.r_squared, b.r_squared, 1e-9);
    for (std::size_t g = 0; g < a.anova.size(); ++g) {
      ASSERT_NEAR(a.anova[g].eta_squared, b.anova[g].eta_squared, 1e-9);
      ASSERT_NEAR(a.anova[g].p_value, b.anova[g].p_value, 1e-9);
    }
    for (std::size_t c = 0; c < a.coefficients.size(); ++c) {
      ASSERT_NEAR(a.coefficients[c].estimate, b.coefficients[c].estimate, 1e-9);
      ASSERT_NEAR(a.coefficients[c].p_value, b.coefficients[c].p_value, 1e-9);
    }
    ASSERT_NEAR(a.diagnostics.normality_stat, b.diagnostics.normality_stat, 1e-9);
    ASSERT_NEAR(a.diagnostics.homosked_stat, b.diagnostics.homosked_stat, 1e-9);
  }
}

TEST(Ols, Diagnostics) {
  std::mt19937_64 gen(77);
  std::vector<std::string> g;
  std::vector<double> y;
  for (int i = 0; i < 2000; ++i) {
    const bool b = i % 2 == 0;
    g.push_back(b ? "b" : "a");
    // Group b has three times the noise: heteroscedastic, and the mixture is
    // heavy tailed.
    y.push_back((b ? 1.0 : 0.0) + std::normal_distribution<double>(0, b ? 3 : 1)(gen));
  }
  const auto het = OlsAnova(BuildDesignFromColumns({Cat("g", g)}, Vec(y)));
  EXPECT_LT(het.diagnostics.homosked_p, 1e-6);
  EXPECT_LT(het.diagnostics.normality_p, 1e-6);
  for (int i = 0; i < 2000; ++i) y[i] = (i % 2 == 0 ? 1.0 : 0.0) + std::normal_distribution<double>(0, 1)(gen);
  const auto hom = OlsAnova(BuildDesignFromColumns({Cat("g", g)}, Vec(y)));
  EXPECT_GT(hom.diagnostics.homosked_p, 1e-3);
  EXPECT_GT(hom.diagnostics.normality_p, 1e-3);
}

TEST(Logit, TwoByTwoClosedForm) {
  const auto d = TwoByTwo();
  const auto fit = FitLogit(d);
  ASSERT_TRUE(fit.converged);
  EXPECT_NEAR(fit.beta[0], std::log(3.0), 1e-8);
  EXPECT_NEAR(fit.beta[1], std::log(1.0 / 9.0), 1e-8);
  const auto ame = MarginalEffects(fit, d);
  ASSERT_EQ(ame.size(), 1u);
  EXPECT_NEAR(ame[0].effect, -0.5, 1e-8);
  EXPECT_EQ(ame[0].significant, ame[0].p_value < 0.05);
  // Wald SE of a 2x2 log odds ratio: sqrt(1/3 + 1 + 1 + 1/3).
  EXPECT_NEAR(fit.coefficients[1].std_error, std::sqrt(8.0 / 3.0), 1e-6);
}

TEST(Logit, InterceptOnly) {
  auto d = BuildDesignFromColumns({}, Vec({1, 0, 0, 0, 1, 0, 0, 0}));
  const auto fit = FitLogit(d);
  EXPECT_NEAR(fit.beta[0], std::log(1.0 / 3.0), 1e-8);
}

TEST(Logit, TwoByJCellLogOdds) {
  std::mt19937_64 gen(55);
  for (int inst = 0; inst < 200; ++inst) {
    const int levels = 2 + static_cast<int>(gen() % 6);
    std::vector<std::string> x;
    std::vector<double> y;
    std::vector<int> pos(levels), neg(levels);
    for (int l = 0; l < levels; ++l) {
      pos[l] = 1 + static_cast<int>(gen() % 30);
      neg[l] = 1 + static_cast<int>(gen() % 30);
      for (int i = 0; i < pos[l]; ++i) {
        x.push_back("L" + std::to_string(l));
        y.push_back(1);
      }
      for (int i = 0; i < neg[l]; ++i) {
        x.push_back("L" + std::to_string(l));
        y.push_back(0);
      }
    }
    const auto d = BuildDesignFromColumns({Cat("x", x)}, Vec(y));
    const auto fit = FitLogit(d);
    ASSERT_TRUE(fit.converged);
    for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i) {
      ASSERT_GE(fit.loglik_trace[i], fit.loglik_trace[i - 1]);
    }
    auto cell = [&](const std::string& level) {
      const int l = std::stoi(level.substr(1));
      return std::log(static_cast<double>(pos[l]) / neg[l]);
    };
    const double ref = cell(d.groups[0].reference);
    ASSERT_NEAR(fit.beta[0], ref, 1e-8);
    for (std::size_t k = 0; k < d.groups[0].levels.size(); ++k) {
      ASSERT_NEAR(fit.beta[d.groups[0].columns[k]], cell(d.groups[0].levels[k]) - ref, 1e-8) << inst;
    }
  }
}

TEST(Logit, SeparationFixtures) {
  // Complete separation.
  auto d = BuildDesignFromColumns({Cat("x", {"a", "a", "a", "b", "b", "b"})}, Vec({0, 0, 0, 1, 1, 1}));
  EXPECT_EQ(CodeOf([&] { FitLogit(d); }), ErrorCode::kSeparation);
  // Quasi-separation: one cell is all ones.
  d = BuildDesignFromColumns({Cat("x", {"a", "a", "a", "a", "b", "b"})}, Vec({0, 1, 0, 1, 1, 1}));
  EXPECT_EQ(CodeOf([&] { FitLogit(d); }), ErrorCode::kSeparation);
  // Continuous predictor splitting the classes.
  d = BuildDesignFromColumns({Cont("c", {-3, -2, -1, 1, 2, 3})}, Vec({0, 0, 0, 1, 1, 1}));
  EXPECT_EQ(CodeOf([&] { FitLogit(d); }), ErrorCode::kSeparation);
  d.y = Vec({1, 1, 1, 1, 1, 1});
  EXPECT_EQ(CodeOf([&] { FitLogit(d); }), ErrorCode::kConstantTarget);
}

TEST(Logit, GradientAtConvergence) {
  std::mt19937_64 gen(8);
  for (int inst = 0; inst < 50; ++inst) {
    auto d = RandomDesign(gen);
    const Eigen::VectorXd eta = d.x * (0.3 * Eigen::VectorXd::Random(d.x.cols()));
    for (Eigen::Index i = 0; i < d.y.size(); ++i) {
      d.y[i] = std::uniform_real_distribution<double>(0, 1)(gen) < 1 / (1 + std::exp(-eta[i])) ? 1 : 0;
    }
    LogitFit fit;
    try {
      fit = FitLogit(d);
    } catch (const Error& e) {
      ASSERT_TRUE(e.code() == ErrorCode::kSeparation || e.code() == ErrorCode::kConstantTarget);
      continue;
    }
    if (!fit.converged) continue;
    const Eigen::VectorXd mu = (1.0 + (-(d.x * fit.beta).array()).exp()).inverse().matrix();
    ASSERT_LE((d.x.transpose() * (d.y - mu)).cwiseAbs().maxCoeff(), 1e-6);
    for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i) {
      ASSERT_GE(fit.loglik_trace[i], fit.loglik_trace[i - 1]);
    }
  }
}

TEST(MarginalEffects, ZeroCoefficientZeroEffect) {
  // Both levels share the same rate, so the level coefficient is 0.
  auto d = BuildDesignFromColumns({Cat("x", {"a", "a", "a", "a", "b", "b", "b", "b"})},
                                  Vec({1, 0, 1, 0, 1, 0, 1, 0}));
  const auto fit = FitLogit(d);
  const auto ame = MarginalEffects(fit, d);
  EXPECT_NEAR(ame[0].effect, 0.0, 1e-12);
  EXPECT_FALSE(ame[0].significant);
  LogitFit stale = fit;
  stale.converged = false;
  EXPECT_EQ(CodeOf([&] { MarginalEffects(stale, d); }), ErrorCode::kNotConverged);
}

TEST(WaldP, Values) {
  EXPECT_EQ(WaldP(0.0), 1.0);
  EXPECT_NEAR(WaldP(1.959964), 0.05, 1e-4);
  EXPECT_NEAR(WaldP(3.0), 0.0027, 1e-4);
  EXPECT_NEAR(WaldP(-3.0), WaldP(3.0), 0);
  EXPECT_EQ(CodeOf([] { WaldP(NAN); }), ErrorCode::kNonFiniteInput);
}

}  // namespace
}  // namespace fairbench
