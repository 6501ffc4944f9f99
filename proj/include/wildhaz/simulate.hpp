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

// Synthetic panels with known occurrence and spread fields.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wildhaz/distributions.hpp"
#include "wildhaz/errors.hpp"
#include "wildhaz/panel.hpp"
#include "wildhaz/region_graph.hpp"
#include "wildhaz/stats.hpp"
#include "wildhaz/training/models.hpp"

namespace wildhaz {

/// Linear predictor intercept + coefficients . x over the raw covariates.
struct LinearTruth {
  double intercept = 0.0;
  std::vector<double> coefficients;

  double operator()(const Eigen::RowVectorXd& x) const {
    double m = intercept;
    for (std::size_t i = 0; i < coefficients.size(); ++i) m += coefficients[i] * x[static_cast<Eigen::Index>(i)];
    return m;
  }
};

struct TruthConfig {
  int regions = 50;
  int months = 24;
  int covariates = 3;
  int start_year = 2001;
  double lat_min = -40.0, lat_max = -12.0;
  double lon_min = 115.0, lon_max = 153.0;
  double log_area_mean = 7.0;  ///< log km^2
  double log_area_sd = 0.5;
  AdjacencySpec adjacency;
  double field_smoothing = 0.5;     ///< x = z + rho * A_norm z
  double temporal_correlation = 0;  ///< AR(1) coefficient of z over months
  LinearTruth occurrence;           ///< logit p0
  std::optional<double> constant_p0;  ///< overrides the occurrence truth
  LinearTruth spread;               ///< m_sigma = log(sigma / sqrt(a))
  double kappa = 1.0;
  double xi = 0.2;
  std::vector<long long> masked_regions;  ///< responses recorded as missing

  void validate() const {
    if (regions < 1 || months < 1 || covariates < 0) throw ValidationError("truth: sizes must be positive");
    if (!(lat_min <= lat_max && lon_min <= lon_max)) throw ValidationError("truth: empty coordinate box");
    if (!(log_area_sd >= 0.0)) throw ValidationError("truth: log_area_sd must be nonnegative");
    if (!(std::abs(temporal_correlation) < 1.0)) throw ValidationError("truth: |temporal_correlation| must be < 1");
    adjacency.validate();
    if (occurrence.coefficients.size() > static_cast<std::size_t>(covariates) ||
        spread.coefficients.size() > static_cast<std::size_t>(covariates)) {
      throw ValidationError("truth: more coefficients than covariates");
    }
    if (constant_p0 && !(*constant_p0 >= 0.0 && *constant_p0 <= 1.0)) throw ValidationError("truth: p0 outside [0,1]");
    if (!(kappa > 0.0) || !(xi > 0.0)) throw ValidationError("truth: kappa and xi must be positive");
  }

  static TruthConfig from_json(const nlohmann::json& j) {
    TruthConfig c;
    c.regions = j.value("regions", c.regions);
    c.months = j.value("months", c.months);
    c.covariates = j.value("covariates", c.covariates);
    c.start_year = j.value("start_year", c.start_year);
    if (j.contains("box")) {
      const auto& b = j.at("box");
      c.lat_min = b.value("lat_min", c.lat_min);
      c.lat_max = b.value("lat_max", c.lat_max);
      c.lon_min = b.value("lon_min", c.lon_min);
      c.lon_max = b.value("lon_max", c.lon_max);
    }
    c.log_area_mean = j.value("log_area_mean", c.log_area_mean);
    c.log_area_sd = j.value("log_area_sd", c.log_area_sd);
    if (j.contains("adjacency")) {
      const auto& a = j.at("adjacency");
      c.adjacency.lambda = a.value("lambda", c.adjacency.lambda);
      c.adjacency.alpha = a.value("alpha", c.adjacency.alpha);
      c.adjacency.delta = a.value("delta", c.adjacency.delta);
    }
    c.field_smoothing = j.value("field_smoothing", c.field_smoothing);
    c.temporal_correlation = j.value("temporal_correlation", c.temporal_correlation);
    auto linear = [&](const char* key, LinearTruth& t) {
      if (!j.contains(key)) return;
      t.intercept = j.at(key).value("intercept", 0.0);
      t.coefficients = j.at(key).value("coefficients", std::vector<double>{});
    };
    linear("occurrence", c.occurrence);
    linear("spread", c.spread);
    if (j.contains("p0") && !j.at("p0").is_null()) c.constant_p0 = j.at("p0").get<double>();
    c.kappa = j.value("kappa", c.kappa);
    c.xi = j.value("xi", c.xi);
    c.masked_regions = j.value("masked_regions", c.masked_regions);
    c.validate();
    return c;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = {
        {"regions", regions},
        {"months", months},
        {"covariates", covariates},
        {"start_year", start_year},
        {"box", {{"lat_min", lat_min}, {"lat_max", lat_max}, {"lon_min", lon_min}, {"lon_max", lon_max}}},
        {"log_area_mean", log_area_mean},
        {"log_area_sd", log_area_sd},
        {"adjacency", {{"lambda", adjacency.lambda}, {"alpha", adjacency.alpha}, {"delta", adjacency.delta}}},
        {"field_smoothing", field_smoothing},
        {"temporal_correlation", temporal_correlation},
        {"occurrence", {{"intercept", occurrence.intercept}, {"coefficients", occurrence.coefficients}}},
        {"spread", {{"intercept", spread.intercept}, {"coefficients", spread.coefficients}}},
        {"kappa", kappa},
        {"xi", xi},
        {"masked_regions", masked_regions}};
    j["p0"] = constant_p0 ? nlohmann::json(*constant_p0) : nlohmann::json(nullptr);
    return j;
  }
};

struct SimulatedPanel {
  PanelDataset panel;
  WeightedGraph graph;
  Eigen::MatrixXd p0;       ///< V x T
  Eigen::MatrixXd sigma;    ///< V x T
  Eigen::MatrixXd logit;    ///< V x T; +-inf for a constant p0 of 0 or 1
  Eigen::MatrixXd m_sigma;  ///< V x T
  TruthConfig truth;
  std::uint64_t seed = 0;
};

/// Seed streams: 0 geometry, 1 covariate field, 2 responses.
inline SimulatedPanel simulate(const TruthConfig& truth, std::uint64_t seed) {
  truth.validate();
  SimulatedPanel sim;
  sim.truth = truth;
  sim.seed = seed;
  const int V = truth.regions, T = truth.months, d = truth.covariates;

  std::mt19937_64 geo(derive_seed(seed, 0));
  std::uniform_real_distribution<double> lat(truth.lat_min, truth.lat_max), lon(truth.lon_min, truth.lon_max);
  std::normal_distribution<double> log_area(truth.log_area_mean, truth.log_area_sd);
  auto& panel = sim.panel;
  for (int s = 0; s < V; ++s) {
    Region r;
    r.id = s + 1;
    r.centroid = {lat(geo), lon(geo)};
    r.area_km2 = std::exp(truth.log_area_sd > 0.0 ? log_area(geo) : truth.log_area_mean);
    panel.regions.regions.push_back(r);
  }
  sim.graph = build_adjacency(panel.regions, truth.adjacency);

  for (int i = 0; i < d; ++i) panel.covariate_names.push_back("x" + std::to_string(i + 1));
  for (int t = 0; t < T; ++t) panel.months.push_back({truth.start_year + t / 12, t % 12 + 1});

  std::mt19937_64 field(derive_seed(seed, 1));
  std::normal_distribution<double> gauss;
  const double phi = truth.temporal_correlation, innov = std::sqrt(1.0 - phi * phi);
  Eigen::MatrixXd z(V, d);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < d; ++i)
      for (int s = 0; s < V; ++s) z(s, i) = (t == 0 ? 0.0 : phi * z(s, i)) + (t == 0 ? 1.0 : innov) * gauss(field);
    panel.covariates.push_back(z + truth.field_smoothing * (sim.graph.normalized * z));
  }

  sim.p0.resize(V, T);
  sim.sigma.resize(V, T);
  sim.logit.resize(V, T);
  sim.m_sigma.resize(V, T);
  panel.response.resize(V, T);
  panel.observed = CellMask::Constant(V, T, true);
  std::mt19937_64 draw(derive_seed(seed, 2));
  std::uniform_real_distribution<double> unif;
  for (int t = 0; t < T; ++t) {
    const auto& x = panel.covariates[static_cast<std::size_t>(t)];
    for (int s = 0; s < V; ++s) {
      const Eigen::RowVectorXd row = x.row(s);
      double p;
      if (truth.constant_p0) {
        p = *truth.constant_p0;
        sim.logit(s, t) = std::log(p) - std::log1p(-p);
      } else {
        sim.logit(s, t) = truth.occurrence(row);
        p = logistic(sim.logit(s, t));
      }
      sim.p0(s, t) = p;
      sim.m_sigma(s, t) = truth.spread(row);
      sim.sigma(s, t) = std::sqrt(panel.regions[static_cast<std::size_t>(s)].area_km2) * std::exp(sim.m_sigma(s, t));
      const bool fire = unif(draw) < p;
      const double y = egpd_draw(draw, {truth.kappa, sim.sigma(s, t), truth.xi});
      panel.response(s, t) = fire ? y : 0.0;
    }
  }
  for (long long id : truth.masked_regions) {
    if (id < 1 || id > V) throw ValidationError("truth: masked region " + std::to_string(id) + " does not exist");
    panel.observed.row(id - 1).setConstant(false);
    panel.response.row(id - 1).setConstant(std::nan(""));
  }
  panel.validate();
  return sim;
}

/// Per-cell truth table `region_id,month_index,year,month,p0,sigma,kappa,xi`.
inline void write_truth_cells(const std::string& path, const SimulatedPanel& sim) {
  csv::Writer w(path);
  w.row({"region_id", "month_index", "year", "month", "p0", "sigma", "kappa", "xi"});
  const auto& panel = sim.panel;
  for (Eigen::Index t = 0; t < panel.num_months(); ++t) {
    for (Eigen::Index s = 0; s < panel.num_regions(); ++s) {
      const auto& stamp = panel.months[static_cast<std::size_t>(t)];
      w.row({std::to_string(panel.regions[static_cast<std::size_t>(s)].id), std::to_string(t + 1),
             std::to_string(stamp.year), std::to_string(stamp.month), csv::fmt(sim.p0(s, t)),
             csv::fmt(sim.sigma(s, t)), csv::fmt(sim.truth.kappa), csv::fmt(sim.truth.xi)});
    }
  }
}

}  // namespace wildhaz
