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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

namespace wildhaz {
namespace {

double auc_by_pairs(const std::vector<int>& labels, const std::vector<double>& scores) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

TEST(Auc, Examples) {
  std::vector<int> y{0, 1, 0, 1};
  // every positive outranks every negative here
  EXPECT_DOUBLE_EQ(auc(y, std::vector<double>{0.1, 0.4, 0.35, 0.8}), 1.0);
  // three concordant pairs, one discordant
  EXPECT_DOUBLE_EQ(auc(y, std::vector<double>{0.1, 0.4, 0.5, 0.8}), 0.75);
  EXPECT_DOUBLE_EQ(auc(y, std::vector<double>{0.1, 0.9, 0.2, 0.8}), 1.0);
  EXPECT_DOUBLE_EQ(auc(y, std::vector<double>{0.3, 0.3, 0.3, 0.3}), 0.5);
  EXPECT_THROW(auc(std::vector<int>{1, 1}, std::vector<double>{0.1, 0.2}), DomainError);
  EXPECT_THROW(auc(std::vector<int>{1, 0}, std::vector<double>{0.1}), StructuralError);
}

TEST(Auc, MatchesPairEnumeration) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> size(2, 100), coin(0, 1), level(0, 9);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = size(rng);
    std::vector<int> y(static_cast<std::size_t>(n));
    std::vector<double> s(y.size());
    for (auto& v : y) v = coin(rng);
    y[0] = 0;
    y[1] = 1;
    // coarse levels so ties are common
    for (auto& v : s) v = level(rng) / 10.0;
    EXPECT_EQ(auc(y, s), auc_by_pairs(y, s));
  }
}

TEST(Auc, InvariantUnderIncreasingTransform) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  std::vector<int> y(200);
  std::vector<double> s(200), t(200);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = i % 3 == 0;
    s[i] = z(rng) + y[i];
    t[i] = std::exp(3.0 * s[i]) + 7.0;
  }
  EXPECT_EQ(auc(y, s), auc(y, t));
}

// ---------------------------------------------------------------- scores

TEST(Weight, NormalizationAndShape) {
  const auto scheme = TwcrpsScheme::standard();
  ASSERT_EQ(scheme.thresholds.size(), 22u);
  EXPECT_DOUBLE_EQ(scheme.thresholds.front(), 0.01);
  EXPECT_DOUBLE_EQ(scheme.thresholds.back(), 200.0);
  EXPECT_EQ(weight_r(scheme.thresholds[18], scheme), 1.0);
  EXPECT_THROW(weight_r(-1.0, scheme), DomainError);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 300.0);
  for (int i = 0; i < 1000; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    EXPECT_LE(weight_r(a, scheme), weight_r(b, scheme));
  }
}

TEST(Weight, UnnormalizedAtZero) {
  // independent evaluation of 1 - 1.1^(-1/4)
  const double expected = 1.0 - 1.0 / std::sqrt(std::sqrt(1.1));
  EXPECT_NEAR(weight_r_unnormalized(0.0), expected, 1e-15);
}

double brute_twcrps(const std::vector<double>& y, const std::vector<EgpdParams>& p, const TwcrpsScheme& s) {
  const double norm = 1.0 - std::pow(1.0 + std::pow(s.thresholds[18] + 1.0, 2) / 10.0, -0.25);
  double total = 0.0;
  for (std::size_t i = 0; i < 19; ++i) {
    const double u = s.thresholds[i];
    const double w = (1.0 - std::pow(1.0 + std::pow(u + 1.0, 2) / 10.0, -0.25)) / norm;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double ind = y[k] <= u ? 1.0 : 0.0;
      total += w * std::pow(ind - egpd_cdf(u, p[k]), 2);
    }
  }
  return total;
}

TEST(Twcrps, MatchesBruteForce) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unif(0.1, 3.0);
  const auto scheme = TwcrpsScheme::standard();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> y(50);
    std::vector<EgpdParams> p(50);
    for (std::size_t k = 0; k < y.size(); ++k) {
      p[k] = {unif(rng), 5.0 * unif(rng), 0.1 * unif(rng)};
      y[k] = egpd_draw(rng, p[k]);
    }
    const double got = twcrps(y, EgpdForecast{p}, scheme);
    const double want = brute_twcrps(y, p, scheme);
    EXPECT_LE(std::abs(got - want), 1e-12 * std::max(1.0, want));
  }
}

TEST(Twcrps, PerfectForecasterScoresZero) {
  const auto scheme = TwcrpsScheme::standard();
  const std::vector<double> y{0.005, 0.7, 13.0, 500.0};
  const auto step = [&](std::size_t k, double u) { return y[k] <= u ? 1.0 : 0.0; };
  EXPECT_EQ(twcrps(y, step, scheme), 0.0);
  EXPECT_EQ(crps(y, step, scheme), 0.0);
}

TEST(Twcrps, HalfForecastOneCell) {
  const auto scheme = TwcrpsScheme::standard();
  const std::vector<double> y{0.001};
  const auto half = [](std::size_t, double) { return 0.5; };
  double expected = 0.0;
  for (std::size_t i = 0; i < 19; ++i) expected += 0.25 * weight_r(scheme.thresholds[i], scheme);
  EXPECT_NEAR(twcrps(y, half, scheme), expected, 1e-15);
  EXPECT_NEAR(crps(y, half, scheme), 19 * 0.25, 1e-15);
}

TEST(Twcrps, UpperIndexIsConfigurable) {
  auto scheme = TwcrpsScheme::standard();
  scheme.upper_index = 22;
  const std::vector<double> y{0.001};
  const auto half = [](std::size_t, double) { return 0.5; };
  EXPECT_NEAR(crps(y, half, scheme), 22 * 0.25, 1e-15);
  scheme.upper_index = 23;
  EXPECT_THROW(crps(y, half, scheme), DomainError);
}

TEST(Twcrps, TrueModelBeatsMisScaledModel) {
  const auto scheme = TwcrpsScheme::standard();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> sig(2.0, 20.0);
  int wins = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> y(300);
    std::vector<EgpdParams> truth(300), wrong(300);
    for (std::size_t k = 0; k < y.size(); ++k) {
      truth[k] = {0.8, sig(rng), 0.2};
      wrong[k] = truth[k];
      wrong[k].sigma *= 2.0;
      y[k] = egpd_draw(rng, truth[k]);
    }
    if (twcrps(y, EgpdForecast{truth}, scheme) <= twcrps(y, EgpdForecast{wrong}, scheme)) ++wins;
  }
  EXPECT_GE(wins, 95);
}

// ---------------------------------------------------------------- PIT

TEST(Pit, MedianMaps) {
  EXPECT_NEAR(to_margin(0.5, Margin::exponential), std::log(2.0), 1e-15);
  EXPECT_NEAR(to_margin(0.5, Margin::gaussian), 0.0, 1e-15);
  EXPECT_TRUE(std::isfinite(to_margin(1.0, Margin::exponential)));
  EXPECT_TRUE(std::isfinite(to_margin(0.0, Margin::gaussian)));
}

TEST(Pit, PlottingPositions) {
  const auto p = plotting_positions(4);
  EXPECT_DOUBLE_EQ(p[0], 0.2);
  EXPECT_DOUBLE_EQ(p[3], 0.8);
}

TEST(Pit, UniformUnderGeneratingModel) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unif(0.3, 3.0);
  const std::size_t n = 10000;
  std::vector<double> y(n);
  std::vector<EgpdParams> p(n);
  for (std::size_t k = 0; k < n; ++k) {
    p[k] = {unif(rng), unif(rng), 0.1 * unif(rng)};
    y[k] = egpd_draw(rng, p[k]);
  }
  const auto u = pit_values(y, p);
  const double d = stats::ks_statistic(u, [](double x) { return x; });
  EXPECT_GT(stats::ks_pvalue(d, n), 0.01);
  const auto qq = pit_qq(y, p, Margin::exponential);
  ASSERT_EQ(qq.empirical.size(), n);
  EXPECT_TRUE(std::is_sorted(qq.empirical.begin(), qq.empirical.end()));
  EXPECT_NEAR(qq.empirical[n / 2], qq.theoretical[n / 2], 0.05);
  EXPECT_THROW(pit_qq(std::vector<double>{1.0}, std::vector<EgpdParams>{p[0]}, Margin::gaussian), DomainError);
}

TEST(Pit, ToleranceBandFromIdenticalReplicates) {
  const std::vector<double> z{0.1, 0.5, 0.9};
  const auto probs = plotting_positions(3);
  const auto band = tolerance_band({z, z, z}, probs);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(band.lower[i], z[i], 1e-15);
    EXPECT_NEAR(band.upper[i], z[i], 1e-15);
  }
}

// ---------------------------------------------------------------- hazard

TEST(Hazard, ZeroInsideAtom) {
  for (double p0 : {0.0, 0.005, 0.01}) EXPECT_EQ(compound_hazard(p0, {1.0, 3.0, 0.2}, 100.0), 0.0);
  EXPECT_GT(compound_hazard(0.02, {1.0, 3.0, 0.2}, 100.0), 0.0);
}

TEST(Hazard, MatchesBisectionOnMixtureCdf) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> p0(0.011, 1.0), kappa(0.3, 3.0), sigma(0.1, 50.0), xi(0.01, 0.9),
      area(1.0, 5000.0);
  for (int i = 0; i < 1000; ++i) {
    const MixtureParams m{p0(rng), {kappa(rng), sigma(rng), xi(rng)}};
    const double a = area(rng);
    const double got = compound_hazard(m.p0, m.egpd, a);
    const double want =
        testing::bisect_quantile([&](double y) { return mixture_cdf(y, m); }, 0.99, 0.0, 1.0) / std::sqrt(a);
    EXPECT_LE(testing::relative_error(got, want, 1e-8), 1e-8) << i;
  }
}

TEST(Hazard, MonotoneInProbabilityAndScale) {
  const EgpdParams base{0.9, 4.0, 0.2};
  double prev = 0.0;
  for (double p0 = 0.0; p0 <= 1.0; p0 += 0.01) {
    const double ch = compound_hazard(p0, base, 50.0);
    EXPECT_GE(ch, prev);
    prev = ch;
  }
  for (double p0 : {0.05, 0.5, 0.95}) {
    prev = 0.0;
    for (double s = 0.1; s < 100.0; s *= 1.3) {
      const double ch = compound_hazard(p0, {0.9, s, 0.2}, 50.0);
      EXPECT_GE(ch, prev);
      prev = ch;
    }
  }
}

TEST(Hazard, LogRelativeSeverityIgnoresArea) {
  auto panel = testing::toy_panel(3, 2, 2, 8);
  panel.regions.regions[0].area_km2 = 1.0;
  panel.regions.regions[1].area_km2 = 1e4;
  const auto g = empty_graph(3);
  std::mt19937_64 rng(9);
  const std::vector<LayerSpec> layers{{LayerKind::dense, 2}};
  OccurrenceModel occ{{"x1", "x2"}, init_network(layers, 2, rng)};
  EgpdModel spread{{"x1", "x2"}, zero_network(layers, 2)};
  DesignTensor design{{"x1", "x2"}, {testing::random_matrix(3, 2, rng), testing::random_matrix(3, 2, rng)}};
  const auto rows = hazard_metrics(occ, spread, g, panel, design, design, 1);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.log_rel_severity, 0.0);
    EXPECT_EQ(r.month, 2);
    // sigma = sqrt(a), so CH does not depend on area either
    EXPECT_NEAR(r.ch, compound_hazard(r.p0, spread.params(1.0), 1.0), 1e-12);
  }
}

// ---------------------------------------------------------------- trends

TEST(Trend, ExactLines) {
  EXPECT_NEAR(trend(std::vector<double>(10, 3.0)).slope, 0.0, 1e-15);
  std::vector<double> s(12);
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = 2.0 * static_cast<double>(k + 1) + 1.0;
  const auto line = trend(s);
  EXPECT_NEAR(line.slope, 2.0, 1e-12);
  EXPECT_NEAR(line.intercept, 1.0, 1e-12);
  EXPECT_THROW(trend(std::vector<double>{1.0}), DomainError);
}

TEST(Trend, NoisyLineWithinThreeStandardErrors) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> noise(0.0, 1.5);
  const std::size_t n = 200;
  std::vector<double> s(n);
  for (std::size_t k = 0; k < n; ++k) s[k] = -0.05 * static_cast<double>(k + 1) + 4.0 + noise(rng);
  const auto line = trend(s);
  double sxx = 0.0, sse = 0.0;
  const double tbar = (n + 1.0) / 2.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k + 1);
    sxx += (t - tbar) * (t - tbar);
    sse += std::pow(s[k] - line.intercept - line.slope * t, 2);
  }
  const double se = std::sqrt(sse / (n - 2.0) / sxx);
  EXPECT_LT(std::abs(line.slope + 0.05), 3.0 * se);
}

TEST(Trend, SpatialMeanSkipsUnobserved) {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 5, 6, 7;
  CellMask obs(2, 3);
  obs << true, false, false, true, true, false;
  const auto mean = spatial_mean(m, obs);
  EXPECT_DOUBLE_EQ(mean[0], 3.0);
  EXPECT_DOUBLE_EQ(mean[1], 6.0);
  EXPECT_TRUE(std::isnan(mean[2]));
}

}  // namespace
}  // namespace wildhaz
