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

// On-disk layout of a fitted two-stage model.

#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "wildhaz/csv.hpp"
#include "wildhaz/errors.hpp"
#include "wildhaz/region_graph.hpp"
#include "wildhaz/training.hpp"

namespace wildhaz {

namespace fs = std::filesystem;

inline constexpr const char* kStandardizerFile = "standardizer.json";
inline constexpr const char* kOccurrenceFile = "occurrence_model.json";
inline constexpr const char* kEgpdFile = "egpd_model.json";
inline constexpr const char* kLossTraceFile = "loss_trace.csv";
inline constexpr const char* kMetadataFile = "run_metadata.json";

inline std::vector<fs::path> artifact_paths(const fs::path& dir) {
  return {dir / kStandardizerFile, dir / kOccurrenceFile, dir / kEgpdFile, dir / kLossTraceFile,
          dir / kMetadataFile};
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json adjacency_json(const AdjacencySpec& a) {
  return {{"lambda", a.lambda}, {"alpha", a.alpha}, {"delta", a.delta}};
}

inline AdjacencySpec adjacency_from_json(const nlohmann::json& j) {
  AdjacencySpec a;
  a.lambda = j.at("lambda").get<double>();
  a.alpha = j.at("alpha").get<int>();
  a.delta = j.at("delta").get<double>();
  a.validate();
  return a;
}

inline nlohmann::json stage_json(const StageFit& s) {
  nlohmann::json j = {{"best_epoch", s.fit.best_epoch},
                      {"best_loss", s.fit.best_loss},
                      {"checkpoint", s.fit.checkpoint_on_validation ? "validation" : "train"},
                      {"epochs_run", s.fit.train_loss.size()},
                      {"train_cells", s.train_cells},
                      {"validation_cells", s.validation_cells}};
  if (!s.fit.train_loss.empty()) j["final_train_loss"] = s.fit.train_loss.back();
  return j;
}

/// `stage,epoch,train_loss,validation_loss`; NA when there was no validation set.
inline void write_loss_trace(const fs::path& path, const TwoStageFit& fit) {
  csv::Writer w(path.string());
  w.row({"stage", "epoch", "train_loss", "validation_loss"});
  auto emit = [&](const char* stage, const FitResult& r) {
    for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
      w.row({stage, std::to_string(e + 1), csv::fmt(r.train_loss[e]),
             e < r.validation_loss.size() ? csv::fmt(r.validation_loss[e]) : "NA"});
    }
  };
  emit("occurrence", fit.occurrence_stage.fit);
  emit("spread", fit.spread_stage.fit);
}

/// Everything needed to reuse a fit; `extra` is merged into the metadata.
inline void save_fit(const fs::path& dir, const TwoStageFit& fit, const AdjacencySpec& adjacency,
                     const TrainConfig& train, const nlohmann::json& extra = nlohmann::json::object()) {
  fs::create_directories(dir);
  write_json(dir / kStandardizerFile, fit.standardizer.to_json());
  write_json(dir / kOccurrenceFile, fit.occurrence.to_json());
  write_json(dir / kEgpdFile, fit.spread.to_json());
  write_loss_trace(dir / kLossTraceFile, fit);
  nlohmann::json meta = {
      {"created_at", utc_timestamp()},
      {"seed", fit.seed},
      {"adjacency", adjacency_json(adjacency)},
      {"train", train.to_json()},
      {"split",
       {{"validation_fraction", fit.split.validation_fraction},
        {"train_cells", fit.split.count(Subset::train)},
        {"validation_cells", fit.split.count(Subset::validation)}}},
      {"covariates", {{"occurrence", fit.occurrence.covariates}, {"spread", fit.spread.covariates}}},
      {"degenerate_covariates", fit.standardizer.degenerate_names()},
      {"stages", {{"occurrence", stage_json(fit.occurrence_stage)}, {"spread", stage_json(fit.spread_stage)}}},
      {"kappa", fit.spread.kappa()},
      {"xi", fit.spread.xi()}};
  for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
  write_json(dir / kMetadataFile, meta);
}

/// A fit read back from disk.
struct LoadedFit {
  Standardizer standardizer;
  OccurrenceModel occurrence;
  EgpdModel spread;
  nlohmann::json metadata;
  AdjacencySpec adjacency;
  std::uint64_t seed = 0;
  double validation_fraction = 0.2;
};

inline LoadedFit load_fit(const fs::path& dir) {
  std::vector<std::string> missing;
  for (const auto& p : artifact_paths(dir))
    if (!fs::exists(p)) missing.push_back(p.string());
  if (!missing.empty()) {
    std::string msg = "missing fit artifacts (run `fit` first); expected:";
    for (const auto& p : artifact_paths(dir)) msg += "\n  " + p.string();
    throw ValidationError(msg);
  }
  LoadedFit f;
  try {
    f.standardizer = Standardizer::from_json(read_json(dir / kStandardizerFile));
    f.occurrence = OccurrenceModel::from_json(read_json(dir / kOccurrenceFile));
    f.spread = EgpdModel::from_json(read_json(dir / kEgpdFile));
    f.metadata = read_json(dir / kMetadataFile);
    f.adjacency = adjacency_from_json(f.metadata.at("adjacency"));
    f.seed = f.metadata.at("seed").get<std::uint64_t>();
    f.validation_fraction = f.metadata.at("split").at("validation_fraction").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(dir.string() + ": malformed artifact: " + e.what());
  }
  return f;
}

}  // namespace wildhaz
