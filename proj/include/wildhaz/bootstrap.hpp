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

// Stationary bootstrap over whole-domain monthly slices.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wildhaz/errors.hpp"
#include "wildhaz/panel.hpp"
#include "wildhaz/stats.hpp"
#include "wildhaz/training.hpp"

namespace wildhaz {

struct BootstrapConfig {
  double block_size = 2.0;  ///< expected block length k, months
  int replicates = 250;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(block_size >= 1.0)) throw ValidationError("expected block size must be at least 1");
    if (replicates < 1) throw ValidationError("replicate count must be at least 1");
  }
};

/// Month indices (0-based) of one resample, plus the drawn block lengths.
struct ResampleIndex {
  std::vector<std::size_t> months;
  std::vector<std::size_t> block_lengths;
};

/// K ~ Geometric on {1, 2, ...} with success probability 1/k (mean k).
template <class Engine>
std::size_t draw_block_length(Engine& rng, double k) {
  if (k <= 1.0) return 1;
  std::geometric_distribution<std::size_t> failures(1.0 / k);
  return 1 + failures(rng);
}

/// Blocks {t*, ..., t*+K-1}; a block running past the last month continues
/// from the first month until it has K entries. Blocks are appended until
/// the sample reaches T months, then the sample is truncated to T.
template <class Engine>
ResampleIndex stationary_resample(std::size_t months, double block_size, Engine& rng) {
  if (months < 1) throw DomainError("resampling needs at least one month");
  if (!(block_size >= 1.0)) throw DomainError("expected block size must be at least 1");
  std::uniform_int_distribution<std::size_t> start(0, months - 1);
  ResampleIndex out;
  out.months.reserve(months + 16);
  while (out.months.size() < months) {
    const std::size_t t0 = start(rng);
    const std::size_t len = draw_block_length(rng, block_size);
    out.block_lengths.push_back(len);
    for (std::size_t i = 0; i < len; ++i) out.months.push_back((t0 + i) % months);
  }
  out.months.resize(months);
  return out;
}

inline ResampleIndex stationary_resample(std::size_t months, const BootstrapConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  return stationary_resample(months, cfg.block_size, rng);
}

struct Replicate {
  int index = 0;  ///< 1-based
  std::uint64_t seed = 0;
  ResampleIndex resample;
  std::optional<TwoStageFit> fit;
  std::string error;  ///< set when the fit failed

  bool ok() const { return fit.has_value(); }
};

/// Seed of replicate r (1-based), independent of execution order.
inline std::uint64_t replicate_seed(std::uint64_t master, int r) {
  return derive_seed(master, static_cast<std::uint64_t>(r));
}

inline PanelDataset resample_panel(const PanelDataset& panel, const ResampleIndex& idx) {
  return panel.select_months(idx.months);
}

/// B independent two-stage fits, each on its own resample and split. The
/// standardizer is shared so that all replicates see the same input scale.
/// Failed replicates are kept with their error message.
inline std::vector<Replicate> bootstrap_fit(const PanelDataset& panel, const WeightedGraph& graph,
                                            const ModelSpecs& specs, const BootstrapConfig& cfg,
                                            const TrainConfig& train_cfg, const Standardizer& standardizer,
                                            WarmStart warm = {}) {
  cfg.validate();
  std::vector<Replicate> out;
  out.reserve(static_cast<std::size_t>(cfg.replicates));
  for (int r = 1; r <= cfg.replicates; ++r) {
    Replicate rep;
    rep.index = r;
    rep.seed = replicate_seed(cfg.seed, r);
    std::mt19937_64 rng(derive_seed(rep.seed, 0));
    rep.resample = stationary_resample(static_cast<std::size_t>(panel.num_months()), cfg.block_size, rng);
    try {
      const auto sample = resample_panel(panel, rep.resample);
      rep.fit = fit_two_stage(sample, graph, specs, train_cfg, derive_seed(rep.seed, 1), &standardizer, warm);
    } catch (const std::exception& e) {
      rep.error = e.what();
    }
    out.push_back(std::move(rep));
  }
  return out;
}

struct ReplicateSummary {
  double lower = 0.0;   ///< 2.5% quantile
  double median = 0.0;
  double upper = 0.0;   ///< 97.5% quantile
};

inline ReplicateSummary summarize_replicates(std::vector<double> values) {
  if (values.empty()) throw DomainError("no replicates to summarize");
  std::sort(values.begin(), values.end());
  return {stats::quantile_sorted(values, 0.025), stats::quantile_sorted(values, 0.5),
          stats::quantile_sorted(values, 0.975)};
}

/// "median (q2.5, q97.5)", e.g. "0.831 (0.812, 0.851)".
inline std::string format_summary(const ReplicateSummary& s, int digits = 3) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.*f (%.*f, %.*f)", digits, s.median, digits, s.lower, digits, s.upper);
  return buf;
}

}  // namespace wildhaz
