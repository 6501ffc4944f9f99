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

// Run configuration: one JSON document with every fitting hyperparameter.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "wildhaz/bootstrap.hpp"
#include "wildhaz/errors.hpp"
#include "wildhaz/evaluation.hpp"
#include "wildhaz/neural.hpp"
#include "wildhaz/region_graph.hpp"
#include "wildhaz/training.hpp"

namespace wildhaz {

namespace fs = std::filesystem;

/// Candidate values for the adjacency hyperparameters.
struct AdjacencyGrid {
  std::vector<double> lambda{650.0};
  std::vector<int> alpha{2};
  std::vector<double> delta{700.0};

  std::vector<AdjacencySpec> candidates() const {
    std::vector<AdjacencySpec> out;
    for (double l : lambda)
      for (int a : alpha)
        for (double d : delta) out.push_back({l, a, d});
    return out;
  }
};

struct RunConfig {
  fs::path source;  ///< the file the config was read from
  fs::path regions_path;
  fs::path panel_path;
  AdjacencyGrid adjacency;
  std::vector<std::vector<LayerSpec>> occurrence_candidates;
  std::vector<std::vector<LayerSpec>> spread_candidates;
  std::vector<double> learning_rates;
  TrainConfig train;  ///< learning_rate is learning_rates.front()
  BootstrapConfig bootstrap;
  bool warm_start_replicates = false;
  bool space_time_covariates = true;
  std::size_t twcrps_upper_index = 19;
  std::uint64_t seed = 0;
  fs::path output;

  AdjacencySpec adjacency_spec() const { return adjacency.candidates().front(); }

  ModelSpecs specs() const {
    return {occurrence_candidates.front(), spread_candidates.front(), space_time_covariates};
  }

  TwcrpsScheme twcrps_scheme() const {
    auto s = TwcrpsScheme::standard();
    s.upper_index = twcrps_upper_index;
    s.validate();
    return s;
  }

  void validate() const {
    if (adjacency.lambda.empty() || adjacency.alpha.empty() || adjacency.delta.empty()) {
      throw ValidationError("config: adjacency grids must be nonempty");
    }
    for (const auto& a : adjacency.candidates()) a.validate();
    if (occurrence_candidates.empty() || spread_candidates.empty()) {
      throw ValidationError("config: each stage needs at least one architecture");
    }
    for (const auto& c : occurrence_candidates) validate_specs(c);
    for (const auto& c : spread_candidates) validate_specs(c);
    if (learning_rates.empty()) throw ValidationError("config: train.learning_rate must be nonempty");
    train.validate();
    bootstrap.validate();
    twcrps_scheme();
  }
};

namespace detail {

inline std::vector<LayerSpec> parse_layers(const nlohmann::json& j) {
  std::vector<LayerSpec> out;
  for (const auto& l : j) {
    LayerSpec s;
    s.kind = parse_layer_kind(l.at("kind").get<std::string>());
    s.width = l.at("width").get<int>();
    out.push_back(s);
  }
  return out;
}

/// A stage is either one layer list or a list of candidate layer lists.
inline std::vector<std::vector<LayerSpec>> parse_candidates(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ValidationError("config: architecture must be a nonempty list");
  if (j.front().is_array()) {
    std::vector<std::vector<LayerSpec>> out;
    for (const auto& c : j) out.push_back(parse_layers(c));
    return out;
  }
  return {parse_layers(j)};
}

template <class T>
std::vector<T> scalar_or_list(const nlohmann::json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

inline nlohmann::json layers_json(const std::vector<LayerSpec>& specs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : specs) out.push_back({{"kind", to_string(s.kind)}, {"width", s.width}});
  return out;
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j, const fs::path& base_dir) {
  RunConfig c;
  try {
    const auto& data = j.at("data");
    c.regions_path = base_dir / data.at("regions").get<std::string>();
    c.panel_path = base_dir / data.at("panel").get<std::string>();
    if (j.contains("adjacency")) {
      const auto& a = j.at("adjacency");
      if (a.contains("lambda")) c.adjacency.lambda = detail::scalar_or_list<double>(a.at("lambda"));
      if (a.contains("alpha")) c.adjacency.alpha = detail::scalar_or_list<int>(a.at("alpha"));
      if (a.contains("delta")) c.adjacency.delta = detail::scalar_or_list<double>(a.at("delta"));
    }
    c.occurrence_candidates = detail::parse_candidates(j.at("occurrence").at("layers"));
    c.spread_candidates = detail::parse_candidates(j.at("spread").at("layers"));
    const auto& t = j.at("train");
    if (!t.contains("learning_rate")) throw ValidationError("config: train.learning_rate is required");
    c.learning_rates = detail::scalar_or_list<double>(t.at("learning_rate"));
    c.train.epochs = t.value("epochs", c.train.epochs);
    c.train.beta1 = t.value("beta1", c.train.beta1);
    c.train.beta2 = t.value("beta2", c.train.beta2);
    c.train.epsilon = t.value("epsilon", c.train.epsilon);
    c.train.validation_fraction = t.value("validation_fraction", c.train.validation_fraction);
    if (!c.learning_rates.empty()) c.train.learning_rate = c.learning_rates.front();
    if (j.contains("bootstrap")) {
      const auto& b = j.at("bootstrap");
      c.bootstrap.block_size = b.value("block_size", c.bootstrap.block_size);
      c.bootstrap.replicates = b.value("replicates", c.bootstrap.replicates);
      c.warm_start_replicates = b.value("warm_start", c.warm_start_replicates);
    }
    c.space_time_covariates = j.value("space_time_covariates", c.space_time_covariates);
    if (j.contains("twcrps")) c.twcrps_upper_index = j.at("twcrps").value("upper_index", c.twcrps_upper_index);
    c.seed = j.value("seed", c.seed);
    c.bootstrap.seed = c.seed;
    c.output = base_dir / j.value("output", std::string("out"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  auto c = parse_run_config(j, path.parent_path());
  c.source = path;
  return c;
}

/// Resolved configuration as recorded in run metadata.
inline nlohmann::json run_config_json(const RunConfig& c) {
  nlohmann::json occ = nlohmann::json::array(), spr = nlohmann::json::array();
  for (const auto& s : c.occurrence_candidates) occ.push_back(detail::layers_json(s));
  for (const auto& s : c.spread_candidates) spr.push_back(detail::layers_json(s));
  auto train = c.train.to_json();
  train["learning_rate"] = c.learning_rates;
  return {{"data", {{"regions", c.regions_path.string()}, {"panel", c.panel_path.string()}}},
          {"adjacency", {{"lambda", c.adjacency.lambda}, {"alpha", c.adjacency.alpha}, {"delta", c.adjacency.delta}}},
          {"occurrence", {{"layers", occ}}},
          {"spread", {{"layers", spr}}},
          {"train", train},
          {"bootstrap",
           {{"block_size", c.bootstrap.block_size},
            {"replicates", c.bootstrap.replicates},
            {"warm_start", c.warm_start_replicates}}},
          {"space_time_covariates", c.space_time_covariates},
          {"twcrps", {{"upper_index", c.twcrps_upper_index}}},
          {"seed", c.seed},
          {"output", c.output.string()}};
}

}  // namespace wildhaz
