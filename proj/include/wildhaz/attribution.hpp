/*
 * Copyright 2026 The wildhaz Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Gradient-ratio contribution scores against the all-mean reference input
// and the dispersion-based covariate ranking built on them.
//
//   CS_i(s,t) = x_i(s,t) g(x*) / (g(x*) - g(x0)),
//
// where g is the derivative of the target at (s,t) with respect to x_i at
// the same cell, x* the observed standardized month and x0 the zero month.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "wildhaz/errors.hpp"
#include "wildhaz/neural.hpp"
#include "wildhaz/stats.hpp"
#include "wildhaz/training/models.hpp"

namespace wildhaz {

/// p0 scores use dp0/dx; sigma scores use the log-link derivative dm_sigma/dx.
enum class Target { p0, sigma };

inline std::string to_string(Target t) { return t == Target::p0 ? "p0" : "sigma"; }

inline constexpr double kDegenerateDenominator = 1e-10;

/// V x d matrix of g = d target(s) / d x_i(s).
inline Eigen::MatrixXd target_gradient(const NetworkWeights& net, const WeightedGraph& graph,
                                       const Eigen::MatrixXd& x, Target target) {
  Eigen::MatrixXd g = own_input_gradient(x, graph, net);
  if (target == Target::p0) {
    const Eigen::VectorXd logit = forward(x, graph, net);
    for (Eigen::Index s = 0; s < g.rows(); ++s) {
      const double p = logistic(logit[s]);
      g.row(s) *= p * (1.0 - p);
    }
  }
  return g;
}

/// Scores for every region and covariate of one standardized month.
/// Falls back to x * g(x*) when the denominator vanishes, which happens
/// whenever the response is locally linear.
inline Eigen::MatrixXd contribution_scores(const NetworkWeights& net, const WeightedGraph& graph,
                                           const Eigen::MatrixXd& x, Target target) {
  const Eigen::MatrixXd g_obs = target_gradient(net, graph, x, target);
  const Eigen::MatrixXd g_ref = target_gradient(net, graph, Eigen::MatrixXd::Zero(x.rows(), x.cols()), target);
  Eigen::MatrixXd cs(x.rows(), x.cols());
  for (Eigen::Index s = 0; s < x.rows(); ++s) {
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const double denom = g_obs(s, i) - g_ref(s, i);
      if (std::abs(denom) < kDegenerateDenominator * (1.0 + std::abs(g_obs(s, i)))) {
        cs(s, i) = x(s, i) * g_obs(s, i);
      } else {
        cs(s, i) = x(s, i) * g_obs(s, i) / denom;
      }
    }
  }
  return cs;
}

/// Tukey boxplot summary of one covariate's pooled scores.
struct BoxplotStats {
  double q1 = 0.0, median = 0.0, q3 = 0.0;
  double whisker_low = 0.0, whisker_high = 0.0;  ///< extreme data within 1.5 IQR
  double iqr() const { return q3 - q1; }
};

inline BoxplotStats boxplot(std::vector<double> values) {
  if (values.empty()) throw DomainError("boxplot of an empty sample");
  std::sort(values.begin(), values.end());
  BoxplotStats b;
  b.q1 = stats::quantile_sorted(values, 0.25);
  b.median = stats::quantile_sorted(values, 0.5);
  b.q3 = stats::quantile_sorted(values, 0.75);
  const double lo = b.q1 - 1.5 * b.iqr(), hi = b.q3 + 1.5 * b.iqr();
  b.whisker_low = *std::lower_bound(values.begin(), values.end(), lo);
  b.whisker_high = *(std::upper_bound(values.begin(), values.end(), hi) - 1);
  return b;
}

struct CovariateRank {
  std::size_t covariate = 0;  ///< declaration index
  std::string name;
  BoxplotStats box;
  int rank = 0;  ///< 1 = most variable
  double iqr() const { return box.iqr(); }
};

/// Descending interquartile range of the pooled scores; ties keep
/// declaration order.
inline std::vector<CovariateRank> rank_covariates(const std::vector<std::vector<double>>& pooled,
                                                  const std::vector<std::string>& names) {
  if (pooled.size() != names.size()) throw StructuralError("rank_covariates: names and scores differ in length");
  std::vector<CovariateRank> out;
  for (std::size_t i = 0; i < pooled.size(); ++i) out.push_back({i, names[i], boxplot(pooled[i]), 0});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.iqr() > b.iqr(); });
  for (std::size_t k = 0; k < out.size(); ++k) out[k].rank = static_cast<int>(k + 1);
  return out;
}

/// Scores for every month of a standardized design, pooled per covariate.
inline std::vector<std::vector<double>> pooled_scores(const NetworkWeights& net, const WeightedGraph& graph,
                                                      const std::vector<Eigen::MatrixXd>& slices, Target target) {
  std::vector<std::vector<double>> pooled(static_cast<std::size_t>(net.input_dim));
  for (const auto& x : slices) {
    const Eigen::MatrixXd cs = contribution_scores(net, graph, x, target);
    for (Eigen::Index i = 0; i < cs.cols(); ++i)
      for (Eigen::Index s = 0; s < cs.rows(); ++s) pooled[static_cast<std::size_t>(i)].push_back(cs(s, i));
  }
  return pooled;
}

}  // namespace wildhaz
