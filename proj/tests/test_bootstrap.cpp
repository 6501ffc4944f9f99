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

TEST(BlockLength, UnitExpectedSizeGivesUnitBlocks) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(draw_block_length(rng, 1.0), 1u);
  const auto r = stationary_resample(30, 1.0, rng);
  EXPECT_EQ(r.block_lengths.size(), 30u);
}

TEST(BlockLength, GeometricLaw) {
  std::mt19937_64 rng(2);
  const int n = 100000;
  const double k = 2.0;
  std::vector<int> counts(11, 0);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto len = draw_block_length(rng, k);
    ASSERT_GE(len, 1u);
    total += static_cast<double>(len);
    if (len <= 10) ++counts[len];
  }
  EXPECT_NEAR(total / n, 2.0, 0.02);
  for (int m = 1; m <= 10; ++m) {
    const double p = std::pow(1.0 - 1.0 / k, m - 1) / k;
    const double se = std::sqrt(p * (1.0 - p) / n);
    EXPECT_LT(std::abs(counts[static_cast<std::size_t>(m)] / static_cast<double>(n) - p), 3.0 * se) << m;
  }
}

TEST(StationaryResample, LengthAndRange) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> months(1, 60);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto T = months(rng);
    const auto r = stationary_resample(T, 2.0, rng);
    ASSERT_EQ(r.months.size(), T);
    for (auto m : r.months) ASSERT_LT(m, T);
  }
}

TEST(StationaryResample, BlocksAreContiguousAndWrap) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t T = 7;
    const auto r = stationary_resample(T, 3.0, rng);
    std::size_t pos = 0;
    for (auto len : r.block_lengths) {
      for (std::size_t i = 1; i < len && pos + i < T; ++i) {
        EXPECT_EQ(r.months[pos + i], (r.months[pos + i - 1] + 1) % T);
      }
      pos += len;
    }
    EXPECT_GE(pos, T);
  }
}

TEST(StationaryResample, MonthFrequenciesUniform) {
  BootstrapConfig cfg;
  cfg.seed = 5;
  const std::size_t T = 24;
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> counts(T, 0.0);
  const int reps = 100000;
  for (int r = 0; r < reps; ++r)
    for (auto m : stationary_resample(T, cfg.block_size, rng).months) counts[m] += 1.0;
  const double expected = static_cast<double>(reps);
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_GT(stats::chi_squared_pvalue(chi2, static_cast<double>(T - 1)), 0.01) << chi2;
}

TEST(Summaries, OrderStatistics) {
  const auto c = summarize_replicates(std::vector<double>(7, 2.5));
  EXPECT_EQ(c.lower, 2.5);
  EXPECT_EQ(c.median, 2.5);
  EXPECT_EQ(c.upper, 2.5);
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  std::shuffle(v.begin(), v.end(), std::mt19937_64(6));
  const auto s = summarize_replicates(v);
  EXPECT_DOUBLE_EQ(s.median, 50.5);
  EXPECT_DOUBLE_EQ(s.lower, 1.0 + 0.025 * 99.0);
  EXPECT_DOUBLE_EQ(s.upper, 1.0 + 0.975 * 99.0);
  EXPECT_EQ(format_summary({0.812, 0.831, 0.851}), "0.831 (0.812, 0.851)");
  EXPECT_THROW(summarize_replicates({}), DomainError);
}

TEST(ReplicateSeeds, IndependentOfOrder) {
  EXPECT_EQ(replicate_seed(9, 3), replicate_seed(9, 3));
  EXPECT_NE(replicate_seed(9, 3), replicate_seed(9, 4));
  EXPECT_NE(replicate_seed(9, 3), replicate_seed(10, 3));
}

ModelSpecs tiny_specs() { return {{{LayerKind::dense, 2}}, {{LayerKind::dense, 2}}, false}; }

TEST(BootstrapFit, DeterministicReplicates) {
  const auto panel = testing::toy_panel(6, 10, 2, 7);
  const auto g = empty_graph(6);
  TrainConfig train;
  train.epochs = 30;
  train.learning_rate = 0.02;
  BootstrapConfig cfg;
  cfg.replicates = 2;
  cfg.seed = 11;
  const auto st = fit_standardizer(panel, false);
  const auto a = bootstrap_fit(panel, g, tiny_specs(), cfg, train, st);
  const auto b = bootstrap_fit(panel, g, tiny_specs(), cfg, train, st);
  ASSERT_EQ(a.size(), 2u);
  for (std::size_t r = 0; r < 2; ++r) {
    ASSERT_TRUE(a[r].ok() && b[r].ok());
    EXPECT_EQ(a[r].resample.months, b[r].resample.months);
    EXPECT_EQ(a[r].fit->spread.log_kappa, b[r].fit->spread.log_kappa);
    EXPECT_EQ(a[r].fit->occurrence_stage.fit.train_loss, b[r].fit->occurrence_stage.fit.train_loss);
  }
  EXPECT_NE(a[0].resample.months, a[1].resample.months);
}

TEST(BootstrapFit, FailuresAreRecorded) {
  auto panel = testing::toy_panel(4, 12, 1, 8);
  for (Eigen::Index t = 1; t < 12; ++t) panel.response.col(t).setZero();
  panel.response(0, 0) = 3.0;
  TrainConfig train;
  train.epochs = 5;
  BootstrapConfig cfg;
  cfg.replicates = 12;
  cfg.seed = 3;
  const auto reps = bootstrap_fit(panel, empty_graph(4), tiny_specs(), cfg, train, fit_standardizer(panel, false));
  ASSERT_EQ(reps.size(), 12u);
  int failed = 0;
  for (const auto& r : reps) {
    if (!r.ok()) {
      ++failed;
      EXPECT_FALSE(r.error.empty());
    }
  }
  EXPECT_GT(failed, 0);
}

// Coverage of the percentile interval for xi under repeated simulation.
TEST(BootstrapFit, ShapeIntervalCoverage) {
  const int trials = 100, replicates = 50;
  const double true_xi = 0.2;
  TruthConfig truth;
  truth.regions = 30;
  truth.months = 24;
  truth.covariates = 1;
  truth.field_smoothing = 0.0;
  truth.constant_p0 = 0.7;
  truth.spread = {0.0, {0.3}};
  truth.kappa = 0.8;
  truth.xi = true_xi;
  TrainConfig train;
  train.epochs = 150;
  train.learning_rate = 0.05;
  const ModelSpecs specs{{{LayerKind::dense, 1}}, {{LayerKind::dense, 2}}, false};
  int covered = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const auto sim = simulate(truth, 1000 + static_cast<std::uint64_t>(trial));
    const auto graph = empty_graph(truth.regions);
    BootstrapConfig cfg;
    cfg.replicates = replicates;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const auto st = fit_standardizer(sim.panel, false);
    const auto reps = bootstrap_fit(sim.panel, graph, specs, cfg, train, st);
    std::vector<double> xi;
    for (const auto& r : reps)
      if (r.ok()) xi.push_back(r.fit->spread.xi());
    ASSERT_GE(xi.size(), static_cast<std::size_t>(replicates - 2));
    const auto s = summarize_replicates(xi);
    if (s.lower <= true_xi && true_xi <= s.upper) ++covered;
  }
  RecordProperty("covered", covered);
  EXPECT_GE(covered, 80) << covered << " of " << trials;
}

}  // namespace
}  // namespace wildhaz
