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

// Scores and diagnostics: AUC, (threshold-weighted) CRPS, PIT Q-Q tables
// with replicate tolerance bands, hazard maps and linear trends.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "wildhaz/distributions.hpp"
#include "wildhaz/errors.hpp"
#include "wildhaz/stats.hpp"
#include "wildhaz/training.hpp"

namespace wildhaz {

// ---------------------------------------------------------------- AUC

/// Mann-Whitney estimate of the area under the ROC curve; tied scores count
/// one half.
inline double auc(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw StructuralError("auc: labels and scores differ in length");
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DomainError("auc is undefined without both classes");
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

// ---------------------------------------------------------------- CRPS

/// Thresholds and weight r(x) = r~(x) / r~(u_norm), with
/// r~(x) = 1 - (1 + (x+1)^2/10)^(-1/4). The estimator sums thresholds
/// 1..upper_index (1-based).
struct TwcrpsScheme {
  std::vector<double> thresholds;
  std::size_t upper_index = 19;
  std::size_t normalization_index = 19;

  /// 22 geometrically spaced thresholds from 0.01 to 200.
  static TwcrpsScheme standard() { return geometric(0.01, 200.0, 22); }

  static TwcrpsScheme geometric(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0 && hi > lo) || count < 2) throw DomainError("bad threshold grid");
    TwcrpsScheme s;
    const double ratio = std::log(hi / lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) s.thresholds.push_back(lo * std::exp(ratio * static_cast<double>(i)));
    s.thresholds.front() = lo;
    s.thresholds.back() = hi;
    return s;
  }

  void validate() const {
    for (std::size_t i = 1; i < thresholds.size(); ++i)
      if (!(thresholds[i] > thresholds[i - 1])) throw DomainError("thresholds must be strictly increasing");
    if (upper_index < 1 || upper_index > thresholds.size()) throw DomainError("upper index out of range");
    if (normalization_index < 1 || normalization_index > thresholds.size()) {
      throw DomainError("normalization index out of range");
    }
  }

  std::span<const double> summed() const { return {thresholds.data(), upper_index}; }
};

inline double weight_r_unnormalized(double x) { return 1.0 - std::pow(1.0 + (x + 1.0) * (x + 1.0) / 10.0, -0.25); }

inline double weight_r(double x, const TwcrpsScheme& scheme) {
  if (!(x >= 0.0)) throw DomainError("weight function needs x >= 0");
  return weight_r_unnormalized(x) / weight_r_unnormalized(scheme.thresholds.at(scheme.normalization_index - 1));
}

/// sum over cells k and thresholds i <= upper_index of
/// w(u_i) [1{y_k <= u_i} - F_k(u_i)]^2, with F_k = cdf(k, u).
template <class CdfEval, class Weight>
double brier_threshold_sum(std::span<const double> observations, CdfEval&& cdf, const TwcrpsScheme& scheme,
                           Weight&& weight) {
  scheme.validate();
  const auto u = scheme.summed();
  std::vector<double> w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) w[i] = weight(u[i]);
  double total = 0.0;
  for (std::size_t k = 0; k < observations.size(); ++k) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double diff = (observations[k] <= u[i] ? 1.0 : 0.0) - cdf(k, u[i]);
      total += w[i] * diff * diff;
    }
  }
  return total;
}

template <class CdfEval>
double twcrps(std::span<const double> observations, CdfEval&& cdf, const TwcrpsScheme& scheme) {
  return brier_threshold_sum(observations, cdf, scheme, [&](double x) { return weight_r(x, scheme); });
}

/// Constant-weight version of the same estimator.
template <class CdfEval>
double crps(std::span<const double> observations, CdfEval&& cdf, const TwcrpsScheme& scheme) {
  return brier_threshold_sum(observations, cdf, scheme, [](double) { return 1.0; });
}

/// Cell-wise eGPD forecasts, the usual case for the spread model.
struct EgpdForecast {
  std::span<const EgpdParams> params;
  double operator()(std::size_t k, double u) const { return egpd_cdf(u, params[k]); }
};

// ---------------------------------------------------------------- PIT / Q-Q

enum class Margin { exponential, gaussian };

inline constexpr double kPitClamp = 1e-12;

inline double to_margin(double u, Margin margin) {
  u = std::clamp(u, kPitClamp, 1.0 - kPitClamp);
  return margin == Margin::exponential ? -std::log1p(-u) : stats::normal_quantile(u);
}

inline double margin_quantile(double p, Margin margin) { return to_margin(p, margin); }

inline std::vector<double> pit_values(std::span<const double> y, std::span<const EgpdParams> params) {
  if (y.size() != params.size()) throw StructuralError("pit: observations and forecasts differ in length");
  std::vector<double> u(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) u[k] = egpd_cdf(y[k], params[k]);
  return u;
}

struct QQTable {
  std::vector<double> empirical;    ///< sorted transformed observations
  std::vector<double> theoretical;  ///< margin quantiles at i/(n+1)
};

inline std::vector<double> plotting_positions(std::size_t n) {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<double>(i + 1) / static_cast<double>(n + 1);
  return p;
}

inline QQTable pit_qq(std::span<const double> y, std::span<const EgpdParams> params, Margin margin) {
  if (y.size() < 2) throw DomainError("Q-Q table needs at least two positive responses");
  const auto u = pit_values(y, params);
  QQTable t;
  t.empirical.reserve(u.size());
  for (double v : u) t.empirical.push_back(to_margin(v, margin));
  std::sort(t.empirical.begin(), t.empirical.end());
  for (double p : plotting_positions(u.size())) t.theoretical.push_back(margin_quantile(p, margin));
  return t;
}

struct ToleranceBand {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Pointwise envelope of replicate Q-Q curves. Each replicate's sorted
/// sample is read at the probabilities `probs` by linear interpolation, then
/// the (1-level)/2 and (1+level)/2 quantiles are taken across replicates.
inline ToleranceBand tolerance_band(const std::vector<std::vector<double>>& replicate_sorted,
                                    std::span<const double> probs, double level = 0.95) {
  if (replicate_sorted.empty()) throw DomainError("tolerance band needs at least one replicate");
  ToleranceBand band;
  std::vector<double> at(replicate_sorted.size());
  for (double p : probs) {
    for (std::size_t b = 0; b < replicate_sorted.size(); ++b) {
      const auto& z = replicate_sorted[b];
      // plotting position i/(n+1) of the i-th order statistic
      const double n = static_cast<double>(z.size());
      const double pos = std::clamp(p * (n + 1.0) - 1.0, 0.0, n - 1.0);
      at[b] = stats::quantile_sorted(z, z.size() > 1 ? pos / (n - 1.0) : 0.0);
    }
    std::sort(at.begin(), at.end());
    band.lower.push_back(stats::quantile_sorted(at, (1.0 - level) / 2.0));
    band.upper.push_back(stats::quantile_sorted(at, (1.0 + level) / 2.0));
  }
  return band;
}

// ---------------------------------------------------------------- hazard

inline constexpr double kHazardLevel = 0.99;

struct HazardRow {
  long long region_id = 0;
  int month = 0;  ///< 1-based panel month index
  double p0 = 0.0;
  double log_rel_severity = 0.0;  ///< log(sigma / sqrt(a)) = m_sigma(x)
  double ch = 0.0;                ///< 99% mixture quantile / sqrt(a)
};

/// CH for one cell from its parameters.
inline double compound_hazard(double p0, const EgpdParams& egpd, double area_km2) {
  return mixture_quantile(kHazardLevel, {p0, egpd}) / std::sqrt(area_km2);
}

/// Hazard summary for every region of month t (0-based).
inline std::vector<HazardRow> hazard_metrics(const OccurrenceModel& occ, const EgpdModel& spread,
                                             const WeightedGraph& graph, const PanelDataset& panel,
                                             const DesignTensor& occ_x, const DesignTensor& spread_x,
                                             Eigen::Index t) {
  const auto& xo = occ_x.slices.at(static_cast<std::size_t>(t));
  const auto& xs = spread_x.slices.at(static_cast<std::size_t>(t));
  const Eigen::VectorXd p0 = occ.p0(xo, graph);
  const Eigen::VectorXd m = spread.log_relative_scale(xs, graph);
  std::vector<HazardRow> rows;
  for (Eigen::Index s = 0; s < panel.num_regions(); ++s) {
    const auto& reg = panel.regions[static_cast<std::size_t>(s)];
    const double sqrt_a = std::sqrt(reg.area_km2);
    HazardRow r;
    r.region_id = reg.id;
    r.month = static_cast<int>(t + 1);
    r.p0 = p0[s];
    r.log_rel_severity = m[s];
    r.ch = compound_hazard(p0[s], spread.params(sqrt_a * std::exp(m[s])), reg.area_km2);
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------- trends

struct TrendLine {
  double slope = 0.0;      ///< per month
  double intercept = 0.0;  ///< value at month index 0
};

/// Ordinary least squares of series[k] on month index k+1.
inline TrendLine trend(std::span<const double> series) {
  if (series.size() < 2) throw DomainError("trend needs at least two months");
  const double n = static_cast<double>(series.size());
  const double tbar = (n + 1.0) / 2.0;
  const double ybar = stats::mean(series);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double dt = static_cast<double>(k + 1) - tbar;
    sxy += dt * (series[k] - ybar);
    sxx += dt * dt;
  }
  TrendLine line;
  line.slope = sxy / sxx;
  line.intercept = ybar - line.slope * tbar;
  return line;
}

/// Unweighted mean over the regions with an observed response, per month.
/// Months with no observed region give NaN.
inline std::vector<double> spatial_mean(const Eigen::MatrixXd& metric, const CellMask& observed) {
  std::vector<double> out;
  for (Eigen::Index t = 0; t < metric.cols(); ++t) {
    double sum = 0.0;
    Eigen::Index n = 0;
    for (Eigen::Index s = 0; s < metric.rows(); ++s) {
      if (!observed(s, t)) continue;
      sum += metric(s, t);
      ++n;
    }
    out.push_back(n ? sum / static_cast<double>(n) : std::nan(""));
  }
  return out;
}

}  // namespace wildhaz
