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

#ifndef FAIRBENCH_STATS_H_
#define FAIRBENCH_STATS_H_

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairbench/pairs.h"

namespace fairbench {

enum class Term { kGender, kAge, kEthnicity, kPose, kDataset };

std::string_view Name(Term t);
std::optional<Term> ParseTerm(std::string_view s);

// Default order of entry for sequential sums of squares.
inline const std::vector<Term> kDefaultTerms = {Term::kGender, Term::kAge, Term::kEthnicity,
                                                Term::kPose};

enum class Target {
  kAngle,    // pair distance converted to degrees, 2 asin(dist / 2)
  kCorrect,  // 1{label == (dist <= threshold)}
};

// One explanatory variable before coding: either a categorical level per row
// or a continuous value per row.
struct TermColumn {
  std::string name;
  bool continuous = false;
  std::vector<std::string> levels;  // categorical rows
  std::vector<double> values;       // continuous rows
};

struct TermGroup {
  std::string term;
  bool categorical = true;
  std::string reference;            // categorical only
  std::vector<std::string> levels;  // dummy-coded levels, lexicographic
  std::vector<Eigen::Index> columns;
};

// Column 0 is the intercept; every other column belongs to exactly one group.
struct DesignMatrix {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> column_names;
  std::vector<TermGroup> groups;
  std::vector<std::string> pruned_terms;  // categoricals with a single level
  std::size_t dropped_rows = 0;           // rows lacking pose when pose is a term
};

// Dummy codes categoricals against their most frequent level (ties to the
// lexicographically smallest name), passes continuous terms through, and
// checks full column rank. Throws kRankDeficient and kInvalidArgument
// (length mismatch, no rows).
DesignMatrix BuildDesignFromColumns(const std::vector<TermColumn>& terms, Eigen::VectorXd y);

struct DesignOptions {
  Target target = Target::kAngle;
  std::vector<Term> terms = kDefaultTerms;
  double threshold = 0.0;  // used by kCorrect
};

// One labeled pair set with distances, optionally tagged with a dataset name
// for pooled fits.
struct DatasetPairs {
  std::string dataset;
  const PairSet* pairs = nullptr;
  double threshold = 0.0;
};

// Throws kUnlabeledSet, kInvalidArgument (missing distances), kConstantTarget
// (kCorrect target with a single class), kRankDeficient.
DesignMatrix BuildDesign(const PairSet& pairs, const DesignOptions& options);
// Pools several datasets; Term::kDataset codes the dataset name and each
// dataset's own threshold drives kCorrect.
DesignMatrix BuildPooledDesign(std::span<const DatasetPairs> datasets,
                               const DesignOptions& options);

struct CoefficientRow {
  std::string term;
  double estimate = 0.0;
  double std_error = 0.0;
  double statistic = 0.0;  // t for OLS, z for logit
  double p_value = 1.0;
};

struct AnovaRow {
  std::string term;
  std::size_t df = 0;
  double sum_of_squares = 0.0;
  double eta_squared = 0.0;
  double f_statistic = 0.0;
  double p_value = 1.0;
};

struct ResidualDiagnostics {
  double normality_stat = 0.0;  // Jarque-Bera
  double normality_p = 1.0;
  double homosked_stat = 0.0;   // Breusch-Pagan, studentized (n R^2)
  double homosked_p = 1.0;
};

struct OlsFit {
  std::vector<CoefficientRow> coefficients;
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  double r_squared = 0.0;
  double ss_total = 0.0;
  double ss_residual = 0.0;
  std::size_t df_residual = 0;
  std::vector<AnovaRow> anova;  // one row per term group, order of entry
  ResidualDiagnostics diagnostics;
};

// Least squares by Householder QR without pivoting so the rotated response
// gives sequential (type I) sums of squares in column order.
// Throws kRankDeficient (also n_rows <= n_cols), kZeroVariance.
OlsFit OlsAnova(const DesignMatrix& design);

struct LogitOptions {
  int max_iterations = 100;
  double loglik_tolerance = 1e-10;
  double gradient_tolerance = 1e-8;
  double converged_gradient_bound = 1e-6;
  double step_tolerance = 1e-9;    // Newton step max-norm required to stop
  double stall_step_bound = 1e-3;  // same, when no further ascent is representable
  double separation_bound = 30.0;
  double separation_linear_predictor = 25.0;
};

struct LogitFit {
  std::vector<CoefficientRow> coefficients;
  Eigen::VectorXd beta;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  bool ridge_applied = false;
  std::vector<double> loglik_trace;  // starting point followed by each accepted step
};

// Newton-Raphson / IRLS maximum likelihood with step halving. Stops when the
// gradient or the log-likelihood change is negligible and the Newton step is
// short. Standard errors come from the inverse observed information, p-values
// from two-sided Wald tests. Throws kConstantTarget, kSeparation (a coefficient leaves
// [-30, 30] during iteration, or the final iterate pushes a linear predictor
// beyond +-25, i.e. fitted probabilities numerically 0 or 1).
LogitFit FitLogit(const DesignMatrix& design, const LogitOptions& options = {});

struct MarginalEffect {
  std::string term;
  std::string level;
  std::string reference;
  double effect = 0.0;  // probability scale, level vs reference
  double p_value = 1.0;
  bool significant = false;  // p_value < 0.05
};

inline constexpr double kSignificanceLevel = 0.05;

// Average discrete-change effect of each dummy level against its reference,
// averaged over the design rows. Throws kNotConverged.
std::vector<MarginalEffect> MarginalEffects(const LogitFit& fit, const DesignMatrix& design);

// Two-sided normal p-value 2 (1 - Phi(|z|)). Throws kNonFiniteInput.
double WaldP(double z);

}  // namespace fairbench

#endif  // FAIRBENCH_STATS_H_
