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

#include "fairbench/stats.h"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "fairbench/error.h"
#include "fairbench/geometry.h"

namespace fairbench {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double Sigmoid(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// Extended precision: near the optimum a Newton step gains less than double
// round-off on the sum, and step halving would then stall short of it.
long double LogLikelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  long double ll = 0.0L;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // y eta - softplus(eta) == -softplus(+-eta), no cancellation.
    const long double z = y[i] != 0.0 ? -static_cast<long double>(eta[i]) : eta[i];
    ll -= std::max(z, 0.0L) + std::log1p(std::exp(-std::abs(z)));
  }
  return ll;
}

double ChiSquaredSurvival(double stat, double df) {
  if (df <= 0 || !(stat > 0)) return 1.0;
  if (std::isinf(stat)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), stat));
}

double FSurvival(double f, double df1, double df2) {
  if (!(f > 0)) return 1.0;
  if (std::isinf(f)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::fisher_f(df1, df2), f));
}

double TwoSidedT(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), std::abs(t)));
}

// Information matrix with the conditional ridge applied.
Eigen::MatrixXd Regularize(Eigen::MatrixXd h, bool* ridge) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0) || hi / lo > 1e12) {
    h.diagonal().array() += 1e-8;
    *ridge = true;
  }
  return h;
}

}  // namespace

std::string_view Name(Term t) {
  switch (t) {
    case Term::kGender: return "gender";
    case Term::kAge: return "age";
    case Term::kEthnicity: return "ethnicity";
    case Term::kPose: return "pose";
    case Term::kDataset: return "dataset";
  }
  return "";
}

std::optional<Term> ParseTerm(std::string_view s) {
  for (Term t : {Term::kGender, Term::kAge, Term::kEthnicity, Term::kPose, Term::kDataset}) {
    if (Name(t) == s) return t;
  }
  return std::nullopt;
}

DesignMatrix BuildDesignFromColumns(const std::vector<TermColumn>& terms, Eigen::VectorXd y) {
  const auto n = static_cast<std::size_t>(y.size());
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "design has no rows");
  DesignMatrix d;
  d.column_names.push_back("intercept");
  Eigen::Index col = 1;
  for (const auto& t : terms) {
    if ((t.continuous ? t.values.size() : t.levels.size()) != n) {
      throw Error(ErrorCode::kInvalidArgument, "term " + t.name + " has the wrong row count");
    }
    TermGroup g;
    g.term = t.name;
    g.categorical = !t.continuous;
    if (t.continuous) {
      g.columns.push_back(col++);
      d.column_names.push_back(t.name);
      d.groups.push_back(std::move(g));
      continue;
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& level : t.levels) ++counts[level];
    if (counts.size() < 2) {
      d.pruned_terms.push_back(t.name);
      continue;
    }
    std::size_t best = 0;
    for (const auto& [level, c] : counts) {
      if (c > best) {
        best = c;
        g.reference = level;
      }
    }
    for (const auto& [level, c] : counts) {
      if (level == g.reference) continue;
      g.levels.push_back(level);
      g.columns.push_back(col++);
      d.column_names.push_back(t.name + "[" + level + "]");
    }
    d.groups.push_back(std::move(g));
  }

  d.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), col);
  d.x.col(0).setOnes();
  std::size_t gi = 0;
  for (const auto& t : terms) {
    if (gi >= d.groups.size() || d.groups[gi].term != t.name) continue;  // pruned
    const TermGroup& g = d.groups[gi++];
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = static_cast<Eigen::Index>(r);
      if (t.continuous) {
        d.x(row, g.columns[0]) = t.values[r];
        continue;
      }
      auto it = std::lower_bound(g.levels.begin(), g.levels.end(), t.levels[r]);
      if (it != g.levels.end() && *it == t.levels[r]) {
        d.x(row, g.columns[static_cast<std::size_t>(it - g.levels.begin())]) = 1.0;
      }
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.x);
  if (qr.rank() < d.x.cols()) {
    throw Error(ErrorCode::kRankDeficient,
                "design has rank " + std::to_string(qr.rank()) + " < " +
                    std::to_string(d.x.cols()) + " columns");
  }
  d.y = std::move(y);
  return d;
}

DesignMatrix BuildPooledDesign(std::span<const DatasetPairs> datasets,
                               const DesignOptions& options) {
  std::vector<TermColumn> columns;
  for (Term t : options.terms) {
    TermColumn c;
    c.name = std::string(Name(t));
    c.continuous = t == Term::kPose;
    columns.push_back(std::move(c));
  }
  std::vector<double> y;
  std::size_t dropped = 0;
  const bool needs_pose =
      std::find(options.terms.begin(), options.terms.end(), Term::kPose) != options.terms.end();
  for (const auto& ds : datasets) {
    for (const auto& p : ds.pairs->pairs) {
      if (!p.attributes) throw Error(ErrorCode::kUnlabeledSet, "pair set is not labeled");
      if (!p.dist) throw Error(ErrorCode::kInvalidArgument, "pair set has no distances");
      if (needs_pose && !p.attributes->pose_angle_deg) {
        ++dropped;
        continue;
      }
      for (std::size_t k = 0; k < options.terms.size(); ++k) {
        switch (options.terms[k]) {
          case Term::kGender:
          case Term::kAge:
          case Term::kEthnicity: {
            const Attribute a = options.terms[k] == Term::kGender ? Attribute::kGender
                                : options.terms[k] == Term::kAge  ? Attribute::kAge
                                                                  : Attribute::kEthnicity;
            columns[k].levels.push_back(p.attributes->Get(a).ToString());
            break;
          }
          case Term::kPose:
            columns[k].values.push_back(*p.attributes->pose_angle_deg);
            break;
          case Term::kDataset:
            columns[k].levels.push_back(ds.dataset);
            break;
        }
      }
      if (options.target == Target::kAngle) {
        y.push_back(ChordToAngleDeg(*p.dist));
      } else {
        y.push_back(((*p.dist <= ds.threshold) == p.positive) ? 1.0 : 0.0);
      }
    }
  }
  if (options.target == Target::kCorrect && !y.empty()) {
    const bool constant = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (constant) throw Error(ErrorCode::kConstantTarget, "correct-identification target is constant");
  }
  DesignMatrix d = BuildDesignFromColumns(
      columns, Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())));
  d.dropped_rows = dropped;
  return d;
}

DesignMatrix BuildDesign(const PairSet& pairs, const DesignOptions& options) {
  const DatasetPairs single{"", &pairs, options.threshold};
  return BuildPooledDesign(std::span<const DatasetPairs>(&single, 1), options);
}

OlsFit OlsAnova(const DesignMatrix& design) {
  const Eigen::MatrixXd& x = design.x;
  const Eigen::VectorXd& y = design.y;
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n <= p) {
    throw Error(ErrorCode::kRankDeficient,
                "need more rows than columns, got " + std::to_string(n) + " x " + std::to_string(p));
  }
  const double mean = y.mean();
  const double ss_direct = (y.array() - mean).square().sum();
  if (!(ss_direct > 1e-24 * y.squaredNorm())) {
    throw Error(ErrorCode::kZeroVariance, "target has zero variance");
  }

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::VectorXd z = qr.householderQ().adjoint() * y;
  const auto r = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();

  OlsFit fit;
  fit.beta = r.solve(z.head(p));
  fit.residuals = y - x * fit.beta;
  fit.ss_residual = z.tail(n - p).squaredNorm();
  const double ss_model = z.segment(1, p - 1).squaredNorm();
  fit.ss_total = ss_model + fit.ss_residual;
  fit.r_squared = ss_model / fit.ss_total;
  fit.df_residual = static_cast<std::size_t>(n - p);
  const double mse = fit.ss_residual / static_cast<double>(fit.df_residual);

  for (const auto& g : design.groups) {
    AnovaRow row;
    row.term = g.term;
    row.df = g.columns.size();
    for (Eigen::Index c : g.columns) row.sum_of_squares += z[c] * z[c];
    row.eta_squared = row.sum_of_squares / fit.ss_total;
    if (mse > 0) {
      row.f_statistic = (row.sum_of_squares / static_cast<double>(row.df)) / mse;
      row.p_value = FSurvival(row.f_statistic, static_cast<double>(row.df),
                              static_cast<double>(fit.df_residual));
    } else {
      row.f_statistic = row.sum_of_squares > 0 ? kInf : 0.0;
      row.p_value = row.sum_of_squares > 0 ? 0.0 : 1.0;
    }
    fit.anova.push_back(row);
  }

  const Eigen::MatrixXd r_inv = r.solve(Eigen::MatrixXd::Identity(p, p));
  for (Eigen::Index c = 0; c < p; ++c) {
    CoefficientRow row;
    row.term = design.column_names[static_cast<std::size_t>(c)];
    row.estimate = fit.beta[c];
    row.std_error = std::sqrt(mse * r_inv.row(c).squaredNorm());
    if (row.std_error > 0) {
      row.statistic = row.estimate / row.std_error;
      row.p_value = TwoSidedT(row.statistic, static_cast<double>(fit.df_residual));
    } else {
      row.statistic = row.estimate == 0 ? 0.0 : kInf;
      row.p_value = row.estimate == 0 ? 1.0 : 0.0;
    }
    fit.coefficients.push_back(row);
  }

  // Jarque-Bera on the residuals.
  const Eigen::ArrayXd e = fit.residuals.array() - fit.residuals.mean();
  const double dn = static_cast<double>(n);
  const double m2 = e.square().sum() / dn;
  if (m2 > 0) {
    const double skew = (e.cube().sum() / dn) / std::pow(m2, 1.5);
    const double kurt = (e.square().square().sum() / dn) / (m2 * m2);
    fit.diagnostics.normality_stat = dn / 6.0 * (skew * skew + (kurt - 3.0) * (kurt - 3.0) / 4.0);
    fit.diagnostics.normality_p = std::exp(-fit.diagnostics.normality_stat / 2.0);
  }
  // Breusch-Pagan (Koenker): n R^2 of squared residuals on the design.
  const Eigen::VectorXd u = fit.residuals.array().square().matrix();
  const double u_mean = u.mean();
  const double ss_u = (u.array() - u_mean).square().sum();
  if (ss_u > 0 && p > 1) {
    const Eigen::VectorXd u_fit = x * qr.solve(u);
    const double r2_aux = 1.0 - (u - u_fit).squaredNorm() / ss_u;
    fit.diagnostics.homosked_stat = dn * std::max(0.0, r2_aux);
    fit.diagnostics.homosked_p =
        ChiSquaredSurvival(fit.diagnostics.homosked_stat, static_cast<double>(p - 1));
  }
  return fit;
}

LogitFit FitLogit(const DesignMatrix& design, const LogitOptions& options) {
  const Eigen::MatrixXd& x = design.x;
  const Eigen::VectorXd& y = design.y;
  const Eigen::Index p = x.cols();
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw Error(ErrorCode::kInvalidArgument, "logit target must be 0/1");
    }
  }
  const double ones = y.sum();
  if (ones == 0.0 || ones == static_cast<double>(y.size())) {
    throw Error(ErrorCode::kConstantTarget, "logit target has a single class");
  }

  LogitFit fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = x * beta;
  long double ll = LogLikelihood(eta, y);
  fit.loglik_trace.push_back(static_cast<double>(ll));

  auto gradient_and_information = [&](const Eigen::VectorXd& eta_now, Eigen::VectorXd* grad,
                                       Eigen::MatrixXd* info) {
    Eigen::VectorXd prob(eta_now.size());
    Eigen::VectorXd w(eta_now.size());
    for (Eigen::Index i = 0; i < eta_now.size(); ++i) {
      prob[i] = Sigmoid(eta_now[i]);
      w[i] = prob[i] * (1.0 - prob[i]);
    }
    *grad = x.transpose() * (y - prob);
    if (info != nullptr) *info = x.transpose() * w.asDiagonal() * x;
  };

  // Both stopping rules also demand a short Newton step. At an optimum pushed
  // out to infinity the gradient vanishes while the step stays near one unit,
  // so separated fits keep walking until the coefficient bound trips.
  Eigen::VectorXd grad;
  Eigen::MatrixXd info;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    gradient_and_information(eta, &grad, &info);
    const Eigen::VectorXd step = Regularize(info, &fit.ridge_applied).ldlt().solve(grad);
    const double step_norm = step.lpNorm<Eigen::Infinity>();
    if (grad.lpNorm<Eigen::Infinity>() < options.gradient_tolerance &&
        step_norm < options.step_tolerance) {
      fit.converged = true;
      break;
    }
    double scale = 1.0;
    Eigen::VectorXd candidate = beta + step;
    Eigen::VectorXd eta_new = x * candidate;
    long double ll_new = LogLikelihood(eta_new, y);
    for (int halving = 0; halving < 60 && !(ll_new >= ll); ++halving) {
      scale /= 2.0;
      candidate = beta + scale * step;
      eta_new = x * candidate;
      ll_new = LogLikelihood(eta_new, y);
    }
    fit.iterations = iter;
    if (candidate.lpNorm<Eigen::Infinity>() > options.separation_bound) {
      throw Error(ErrorCode::kSeparation,
                  "coefficient diverged beyond " + std::to_string(options.separation_bound) +
                      " (complete or quasi-complete separation)");
    }
    if (!(ll_new >= ll)) {
      // No ascent left in floating point.
      fit.converged = grad.lpNorm<Eigen::Infinity>() <= options.converged_gradient_bound &&
                      step_norm < options.stall_step_bound;
      break;
    }
    const double delta = static_cast<double>(ll_new - ll);
    beta = candidate;
    eta = eta_new;
    ll = ll_new;
    fit.loglik_trace.push_back(static_cast<double>(ll));
    if (delta < options.loglik_tolerance && scale * step_norm < options.step_tolerance) {
      gradient_and_information(eta, &grad, nullptr);
      if (grad.lpNorm<Eigen::Infinity>() <= options.converged_gradient_bound) {
        fit.converged = true;
        break;
      }
    }
  }
  // The conditional ridge damps a separated direction, which can then creep
  // toward the coefficient bound without reaching it.
  if (eta.lpNorm<Eigen::Infinity>() > options.separation_linear_predictor) {
    throw Error(ErrorCode::kSeparation,
                "fitted probabilities are numerically 0 or 1 (quasi-complete separation)");
  }

  gradient_and_information(eta, &grad, &info);
  const Eigen::MatrixXd cov =
      Regularize(info, &fit.ridge_applied).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.beta = beta;
  fit.log_likelihood = static_cast<double>(ll);
  for (Eigen::Index c = 0; c < p; ++c) {
    CoefficientRow row;
    row.term = design.column_names[static_cast<std::size_t>(c)];
    row.estimate = beta[c];
    row.std_error = std::sqrt(std::max(0.0, cov(c, c)));
    row.statistic = row.std_error > 0 ? row.estimate / row.std_error : 0.0;
    row.p_value = WaldP(row.statistic);
    fit.coefficients.push_back(row);
  }
  return fit;
}

std::vector<MarginalEffect> MarginalEffects(const LogitFit& fit, const DesignMatrix& design) {
  if (!fit.converged) throw Error(ErrorCode::kNotConverged, "logit fit did not converge");
  const Eigen::VectorXd eta = design.x * fit.beta;
  std::vector<MarginalEffect> out;
  for (const auto& g : design.groups) {
    if (!g.categorical) continue;
    Eigen::VectorXd base = eta;
    for (Eigen::Index c : g.columns) base -= design.x.col(c) * fit.beta[c];
    for (std::size_t k = 0; k < g.columns.size(); ++k) {
      const Eigen::Index c = g.columns[k];
      double sum = 0.0;
      for (Eigen::Index i = 0; i < base.size(); ++i) {
        sum += Sigmoid(base[i] + fit.beta[c]) - Sigmoid(base[i]);
      }
      MarginalEffect m;
      m.term = g.term;
      m.level = g.levels[k];
      m.reference = g.reference;
      m.effect = sum / static_cast<double>(base.size());
      m.p_value = fit.coefficients[static_cast<std::size_t>(c)].p_value;
      m.significant = m.p_value < kSignificanceLevel;
      out.push_back(m);
    }
  }
  return out;
}

double WaldP(double z) {
  if (!std::isfinite(z)) throw Error(ErrorCode::kNonFiniteInput, "non-finite Wald statistic");
  return std::erfc(std::abs(z) / std::numbers::sqrt2);
}

}  // namespace fairbench
