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

// Two-stage fit: logistic occurrence network, then the eGPD spread network
// on positive responses, sharing one train/validation split.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wildhaz/errors.hpp"
#include "wildhaz/neural.hpp"
#include "wildhaz/panel.hpp"
#include "wildhaz/region_graph.hpp"
#include "wildhaz/stats.hpp"
#include "wildhaz/training/adam.hpp"
#include "wildhaz/training/losses.hpp"
#include "wildhaz/training/models.hpp"
#include "wildhaz/training/split.hpp"
#include "wildhaz/training/standardizer.hpp"

namespace wildhaz {

struct ModelSpecs {
  std::vector<LayerSpec> occurrence;
  std::vector<LayerSpec> spread;
  bool space_time_covariates = true;
};

/// Standardized network inputs for both stages.
struct ModelInputs {
  DesignTensor occurrence;
  DesignTensor spread;
};

inline Standardizer fit_standardizer(const PanelDataset& panel, bool space_time) {
  return Standardizer::fit(build_design(panel, {space_time, true}));
}

inline std::vector<std::string> spread_columns(const std::vector<std::string>& occurrence_columns) {
  std::vector<std::string> out;
  for (const auto& n : occurrence_columns)
    if (n != kAreaColumn) out.push_back(n);
  return out;
}

inline DesignTensor model_input(const PanelDataset& panel, const Standardizer& st,
                                const std::vector<std::string>& columns) {
  return st.transform(build_design(panel, {true, true}), columns);
}

inline ModelInputs make_inputs(const PanelDataset& panel, const Standardizer& st, bool space_time) {
  const auto raw = build_design(panel, {space_time, true});
  ModelInputs in;
  in.occurrence = st.transform(raw, raw.names);
  in.spread = st.transform(raw, spread_columns(raw.names));
  return in;
}

struct StageFit {
  FitResult fit;
  std::size_t train_cells = 0;
  std::size_t validation_cells = 0;
};

inline StageFit fit_occurrence(OccurrenceModel& model, const DesignTensor& x, const WeightedGraph& graph,
                               const PanelDataset& panel, const SplitAssignment& split, const TrainConfig& cfg) {
  const CellMask train_cells = split.mask(Subset::train);
  const CellMask val_cells = split.mask(Subset::validation);
  if (!train_cells.any()) throw ValidationError("occurrence stage has no training cells");
  NetworkWeights work = model.network;
  NetworkWeights grad = work.zeros_like();
  Eigen::VectorXd init(static_cast<Eigen::Index>(work.parameter_count()));
  work.pack({init.data(), static_cast<std::size_t>(init.size())});
  auto train = [&](const Eigen::VectorXd& p, Eigen::VectorXd& g) {
    work.unpack({p.data(), static_cast<std::size_t>(p.size())});
    grad = work.zeros_like();
    const double loss = bernoulli_nll(x, graph, work, panel, train_cells, &grad);
    grad.pack({g.data(), static_cast<std::size_t>(g.size())});
    return loss;
  };
  ValidationObjective validate;
  if (val_cells.any()) {
    validate = [&](const Eigen::VectorXd& p) {
      work.unpack({p.data(), static_cast<std::size_t>(p.size())});
      return bernoulli_nll(x, graph, work, panel, val_cells);
    };
  }
  StageFit out;
  out.fit = adam_fit(init, cfg, train, validate);
  out.train_cells = static_cast<std::size_t>(train_cells.count());
  out.validation_cells = static_cast<std::size_t>(val_cells.count());
  model.network.unpack({out.fit.params.data(), static_cast<std::size_t>(out.fit.params.size())});
  return out;
}

/// Parameter vector layout: network, then log kappa, log xi.
inline Eigen::VectorXd pack_egpd(const EgpdModel& m) {
  const auto n = static_cast<Eigen::Index>(m.network.parameter_count());
  Eigen::VectorXd p(n + 2);
  m.network.pack({p.data(), static_cast<std::size_t>(n)});
  p[n] = m.log_kappa;
  p[n + 1] = m.log_xi;
  return p;
}

inline void unpack_egpd(EgpdModel& m, const Eigen::VectorXd& p) {
  const auto n = static_cast<Eigen::Index>(m.network.parameter_count());
  m.network.unpack({p.data(), static_cast<std::size_t>(n)});
  m.log_kappa = p[n];
  m.log_xi = p[n + 1];
}

inline StageFit fit_spread(EgpdModel& model, const DesignTensor& x, const WeightedGraph& graph,
                           const PanelDataset& panel, const SplitAssignment& split, const TrainConfig& cfg) {
  const CellMask positive = panel.positive();
  const CellMask train_cells = split.mask(Subset::train) && positive;
  const CellMask val_cells = split.mask(Subset::validation) && positive;
  if (!train_cells.any()) {
    throw ValidationError("spread stage has no positive responses among the training cells");
  }
  EgpdModel work = model;
  const auto n = static_cast<Eigen::Index>(work.network.parameter_count());
  auto train = [&](const Eigen::VectorXd& p, Eigen::VectorXd& g) {
    unpack_egpd(work, p);
    EgpdGradient grad{work.network.zeros_like(), 0.0, 0.0};
    const double loss = egpd_nll(x, graph, work, panel, train_cells, &grad);
    grad.network.pack({g.data(), static_cast<std::size_t>(n)});
    g[n] = grad.log_kappa;
    g[n + 1] = grad.log_xi;
    return loss;
  };
  ValidationObjective validate;
  if (val_cells.any()) {
    validate = [&](const Eigen::VectorXd& p) {
      unpack_egpd(work, p);
      return egpd_nll(x, graph, work, panel, val_cells);
    };
  }
  StageFit out;
  out.fit = adam_fit(pack_egpd(model), cfg, train, validate);
  out.train_cells = static_cast<std::size_t>(train_cells.count());
  out.validation_cells = static_cast<std::size_t>(val_cells.count());
  unpack_egpd(model, out.fit.params);
  return out;
}

struct TwoStageFit {
  Standardizer standardizer;
  OccurrenceModel occurrence;
  EgpdModel spread;
  StageFit occurrence_stage;
  StageFit spread_stage;
  SplitAssignment split;
  std::uint64_t seed = 0;
};

/// Optional starting point for both networks (and kappa, xi).
struct WarmStart {
  const OccurrenceModel* occurrence = nullptr;
  const EgpdModel* spread = nullptr;
};

inline constexpr double kInitialKappa = 1.0;
inline constexpr double kInitialXi = 0.2;

/// Seed streams: 0 split, 1 occurrence weights, 2 spread weights.
inline TwoStageFit fit_two_stage(const PanelDataset& panel, const WeightedGraph& graph, const ModelSpecs& specs,
                                 const TrainConfig& cfg, std::uint64_t seed,
                                 const Standardizer* standardizer = nullptr, WarmStart warm = {}) {
  cfg.validate();
  panel.validate();
  if (graph.size() != panel.num_regions()) throw StructuralError("graph and panel disagree on region count");
  TwoStageFit out;
  out.seed = seed;
  out.standardizer = standardizer ? *standardizer : fit_standardizer(panel, specs.space_time_covariates);
  const auto inputs = make_inputs(panel, out.standardizer, specs.space_time_covariates);
  out.split = make_split(panel.observed, cfg.validation_fraction, derive_seed(seed, 0));

  out.occurrence.covariates = inputs.occurrence.names;
  if (warm.occurrence) {
    out.occurrence.network = warm.occurrence->network;
  } else {
    std::mt19937_64 rng(derive_seed(seed, 1));
    out.occurrence.network = init_network(specs.occurrence, inputs.occurrence.width(), rng);
  }
  out.occurrence_stage = fit_occurrence(out.occurrence, inputs.occurrence, graph, panel, out.split, cfg);

  out.spread.covariates = inputs.spread.names;
  if (warm.spread) {
    out.spread.network = warm.spread->network;
    out.spread.log_kappa = warm.spread->log_kappa;
    out.spread.log_xi = warm.spread->log_xi;
  } else {
    std::mt19937_64 rng(derive_seed(seed, 2));
    out.spread.network = init_network(specs.spread, inputs.spread.width(), rng);
    out.spread.log_kappa = std::log(kInitialKappa);
    out.spread.log_xi = std::log(kInitialXi);
  }
  out.spread_stage = fit_spread(out.spread, inputs.spread, graph, panel, out.split, cfg);
  return out;
}

}  // namespace wildhaz
