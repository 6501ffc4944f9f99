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

// Fitted parameter functions: logit p0 = m_p(x) and
// log sigma = log sqrt(a) + m_sigma(x), with global kappa and xi.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "wildhaz/distributions.hpp"
#include "wildhaz/neural.hpp"
#include "wildhaz/panel.hpp"
#include "wildhaz/training/standardizer.hpp"

namespace wildhaz {

inline double logistic(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

struct OccurrenceModel {
  std::vector<std::string> covariates;  ///< standardized inputs, in network order
  NetworkWeights network;

  /// logit p0 for every region of one month.
  Eigen::VectorXd logits(const Eigen::MatrixXd& x, const WeightedGraph& graph) const {
    return forward(x, graph, network);
  }
  Eigen::VectorXd p0(const Eigen::MatrixXd& x, const WeightedGraph& graph) const {
    return logits(x, graph).unaryExpr([](double z) { return logistic(z); });
  }

  nlohmann::json to_json() const {
    return {{"format_version", 1}, {"covariates", covariates}, {"network", network_to_json(network)}};
  }
  static OccurrenceModel from_json(const nlohmann::json& j) {
    try {
      OccurrenceModel m;
      m.covariates = j.at("covariates").get<std::vector<std::string>>();
      m.network = network_from_json(j.at("network"));
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("malformed occurrence model: ") + e.what());
    }
  }
};

/// kappa and xi are stored on the log scale so both stay positive.
struct EgpdModel {
  std::vector<std::string> covariates;
  NetworkWeights network;
  double log_kappa = 0.0;
  double log_xi = std::log(0.2);

  double kappa() const { return std::exp(log_kappa); }
  double xi() const { return std::exp(log_xi); }

  /// m_sigma(x) = log(sigma / sqrt(a)) for one month.
  Eigen::VectorXd log_relative_scale(const Eigen::MatrixXd& x, const WeightedGraph& graph) const {
    return forward(x, graph, network);
  }

  Eigen::VectorXd sigma(const Eigen::MatrixXd& x, const WeightedGraph& graph, const RegionSet& regions) const {
    Eigen::VectorXd m = log_relative_scale(x, graph);
    for (Eigen::Index s = 0; s < m.size(); ++s) {
      m[s] = std::sqrt(regions[static_cast<std::size_t>(s)].area_km2) * std::exp(m[s]);
    }
    return m;
  }

  EgpdParams params(double sigma) const { return {kappa(), sigma, xi()}; }

  nlohmann::json to_json() const {
    return {{"format_version", 1},  {"covariates", covariates}, {"log_kappa", log_kappa},
            {"log_xi", log_xi},     {"kappa", kappa()},         {"xi", xi()},
            {"network", network_to_json(network)}};
  }
  static EgpdModel from_json(const nlohmann::json& j) {
    try {
      EgpdModel m;
      m.covariates = j.at("covariates").get<std::vector<std::string>>();
      m.log_kappa = j.at("log_kappa").get<double>();
      m.log_xi = j.at("log_xi").get<double>();
      m.network = network_from_json(j.at("network"));
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("malformed eGPD model: ") + e.what());
    }
  }
};

}  // namespace wildhaz
