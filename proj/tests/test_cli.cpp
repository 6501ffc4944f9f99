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

// Drives the built command-line tool on a small simulated panel.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "support.hpp"

namespace wildhaz {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  static inline testing::TempDir* dir = nullptr;

  static fs::path root() { return dir->path(); }
  static fs::path config() { return root() / "run.json"; }
  static fs::path out() { return root() / "out"; }

  /// Exit status of the tool; stdout and stderr go to root()/last.log.
  static int run(const std::string& args) {
    const std::string cmd = std::string(WILDHAZ_CLI) + " " + args + " > \"" + (root() / "last.log").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  static std::string last_log() { return slurp(root() / "last.log"); }

  static void write_run_config(const fs::path& path, const std::string& delta, const fs::path& output) {
    nlohmann::json j = {
        {"data", {{"regions", "data/regions.csv"}, {"panel", "data/panel.csv"}}},
        {"adjacency", {{"lambda", 200.0}, {"alpha", 1}, {"delta", nlohmann::json::parse(delta)}}},
        {"occurrence", {{"layers", {{{"kind", "graph_skip"}, {"width", 4}}}}}},
        {"spread", {{"layers", {{{"kind", "graph_skip"}, {"width", 3}}}}}},
        {"train", {{"epochs", 60}, {"learning_rate", 0.02}}},
        {"bootstrap", {{"block_size", 2.0}, {"replicates", 3}}},
        {"seed", 17},
        {"output", output.string()}};
    std::ofstream(path) << j.dump(2);
  }

  static void SetUpTestSuite() {
    dir = new testing::TempDir("wildhaz_cli");
    TruthConfig truth;
    truth.regions = 20;
    truth.months = 24;
    truth.occurrence = {0.0, {1.0, 0.0, -0.5}};
    truth.spread = {-1.0, {0.4, 0.0, 0.0}};
    truth.adjacency = {200.0, 1, 400.0};
    std::ofstream(root() / "truth.json") << truth.to_json().dump(2);
    write_run_config(config(), "400.0", "out");
    ASSERT_EQ(run("simulate --config " + (root() / "truth.json").string() + " --seed 3 --out " +
                  (root() / "data").string()),
              0)
        << last_log();
    ASSERT_EQ(run("fit --config " + config().string()), 0) << last_log();
  }
  static void TearDownTestSuite() {
    delete dir;
    dir = nullptr;
  }
};

TEST_F(Cli, SimulateWritesPanelAndTruth) {
  for (const char* f : {"regions.csv", "panel.csv", "truth_cells.csv", "truth.json"})
    EXPECT_TRUE(fs::exists(root() / "data" / f)) << f;
  EXPECT_EQ(run("ingest-check --config " + config().string()), 0) << last_log();
  EXPECT_NE(last_log().find("regions=20 months=24"), std::string::npos) << last_log();
}

TEST_F(Cli, FitWritesAllArtifacts) {
  for (const char* f : {"standardizer.json", "occurrence_model.json", "egpd_model.json", "loss_trace.csv",
                        "run_metadata.json"})
    EXPECT_TRUE(fs::exists(out() / f)) << f;
  const auto trace = csv::read((out() / "loss_trace.csv").string());
  EXPECT_EQ(trace.header, (std::vector<std::string>{"stage", "epoch", "train_loss", "validation_loss"}));
  EXPECT_EQ(trace.rows.size(), 120u);
}

TEST_F(Cli, FitIsDeterministicModuloTimestamp) {
  const fs::path cfg = root() / "rerun.json";
  write_run_config(cfg, "400.0", "rerun");
  ASSERT_EQ(run("fit --config " + cfg.string()), 0) << last_log();
  auto a = nlohmann::json::parse(slurp(out() / "run_metadata.json"));
  auto b = nlohmann::json::parse(slurp(root() / "rerun" / "run_metadata.json"));
  for (auto* m : {&a, &b}) {
    m->erase("created_at");
    (*m)["config"].erase("output");
  }
  EXPECT_EQ(a, b);
  for (const char* f : {"standardizer.json", "occurrence_model.json", "egpd_model.json", "loss_trace.csv"})
    EXPECT_EQ(slurp(out() / f), slurp(root() / "rerun" / f)) << f;
}

TEST_F(Cli, EvaluateEmitsScores) {
  ASSERT_EQ(run("evaluate --config " + config().string()), 0) << last_log();
  const auto scores = csv::read((out() / "scores.csv").string());
  EXPECT_EQ(scores.header, (std::vector<std::string>{"metric", "value", "replicate"}));
  std::set<std::string> metrics;
  for (const auto& r : scores.rows) metrics.insert(r[0]);
  for (const char* m : {"auc_validation", "crps_validation", "twcrps_validation", "auc_all", "crps_all", "twcrps_all"})
    EXPECT_TRUE(metrics.count(m)) << m;
  const auto qq = csv::read((out() / "qq_exponential.csv").string());
  EXPECT_EQ(qq.header, (std::vector<std::string>{"empirical", "theoretical", "band_lo", "band_hi"}));
  EXPECT_FALSE(qq.rows.empty());
}

TEST_F(Cli, HazardOneRowPerRegion) {
  ASSERT_EQ(run("hazard --config " + config().string() + " --month 5"), 0) << last_log();
  const auto h = csv::read((out() / "hazard.csv").string());
  EXPECT_EQ(h.header, (std::vector<std::string>{"region_id", "month", "p0", "log_rel_severity", "ch"}));
  ASSERT_EQ(h.rows.size(), 20u);
  for (const auto& r : h.rows) {
    EXPECT_EQ(r[1], "5");
    EXPECT_GE(csv::parse_double(r[4], "ch"), 0.0);
    const double p0 = csv::parse_double(r[2], "p0");
    EXPECT_TRUE(p0 >= 0.0 && p0 <= 1.0);
  }
  const auto trend = csv::read((out() / "trend.csv").string());
  EXPECT_EQ(trend.rows.size(), 3u);
  EXPECT_EQ(run("hazard --config " + config().string() + " --month 25"), 1);
}

TEST_F(Cli, BootstrapSummaryRow) {
  const fs::path cfg = root() / "boot.json";
  write_run_config(cfg, "400.0", "out");
  ASSERT_EQ(run("bootstrap --config " + cfg.string() + " --replicates 3"), 0) << last_log();
  const auto t = csv::read((out() / "replicates.csv").string());
  ASSERT_EQ(t.rows.size(), 4u);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(t.rows[r][0], std::to_string(r + 1));
  EXPECT_EQ(t.rows[3][0], "summary");
  const std::regex fmt(R"(^-?[0-9.]+(e-?[0-9]+)? \(-?[0-9.]+(e-?[0-9]+)?, -?[0-9.]+(e-?[0-9]+)?\)$)");
  for (std::size_t c = 1; c < t.header.size(); ++c) EXPECT_TRUE(std::regex_match(t.rows[3][c], fmt)) << t.rows[3][c];
  // replicate scores join the evaluation once replicates exist
  ASSERT_EQ(run("evaluate --config " + config().string()), 0) << last_log();
  const auto scores = csv::read((out() / "scores.csv").string());
  bool replicate_rows = false;
  for (const auto& r : scores.rows) replicate_rows |= r[2] != "main";
  EXPECT_TRUE(replicate_rows);
}

TEST_F(Cli, AttributeWritesRanking) {
  ASSERT_EQ(run("attribute --config " + config().string()), 0) << last_log();
  const auto r = csv::read((out() / "attribution_ranking.csv").string());
  EXPECT_EQ(r.header, (std::vector<std::string>{"covariate", "target", "iqr", "rank"}));
  std::set<std::string> targets;
  for (const auto& row : r.rows) targets.insert(row[1]);
  EXPECT_EQ(targets, (std::set<std::string>{"p0", "sigma"}));
  const auto s = csv::read((out() / "attribution_scores.csv").string());
  EXPECT_EQ(s.header, (std::vector<std::string>{"covariate", "region_id", "month", "target", "score"}));
}

TEST_F(Cli, GridSelectsBestRecordedRun) {
  const fs::path cfg = root() / "grid.json";
  write_run_config(cfg, "[0.0, 50.0]", "grid");
  ASSERT_EQ(run("grid --config " + cfg.string()), 0) << last_log();
  const auto g = csv::read((root() / "grid" / "grid.csv").string());
  ASSERT_EQ(g.rows.size(), 4u);
  const auto c_stage = g.column("stage"), c_delta = g.column("delta"), c_auc = g.column("validation_auc"),
             c_nll = g.column("validation_nll"), c_sel = g.column("selected");
  std::set<std::string> deltas;
  for (const std::string stage : {"occurrence", "spread"}) {
    double best = stage == "spread" ? INFINITY : -INFINITY, chosen = NAN;
    for (const auto& r : g.rows) {
      if (r[c_stage] != stage) continue;
      deltas.insert(r[c_delta]);
      const double v = csv::parse_double(r[stage == "spread" ? c_nll : c_auc], "metric");
      best = stage == "spread" ? std::min(best, v) : std::max(best, v);
      if (r[c_sel] == "1") chosen = v;
    }
    EXPECT_EQ(chosen, best) << stage;
  }
  EXPECT_EQ(deltas, (std::set<std::string>{"0", "50"}));
  EXPECT_TRUE(fs::exists(root() / "grid" / "grid_selection.json"));
}

TEST_F(Cli, MissingArtifactsListsExpectedPaths) {
  const fs::path cfg = root() / "empty.json";
  write_run_config(cfg, "400.0", "nothing_here");
  EXPECT_EQ(run("evaluate --config " + cfg.string()), 1);
  const auto log = last_log();
  EXPECT_NE(log.find("occurrence_model.json"), std::string::npos) << log;
  EXPECT_NE(log.find("egpd_model.json"), std::string::npos) << log;
  EXPECT_NE(log.find("standardizer.json"), std::string::npos) << log;
}

TEST_F(Cli, ExitCodes) {
  const fs::path fixtures(WILDHAZ_FIXTURES);
  EXPECT_EQ(run("ingest-check --regions " + (fixtures / "regions.csv").string() + " --panel " +
                (fixtures / "panel_good.csv").string()),
            0);
  EXPECT_EQ(run("ingest-check --regions " + (fixtures / "regions.csv").string() + " --panel " +
                (fixtures / "panel_negative.csv").string()),
            1);
  EXPECT_NE(last_log().find("region 3"), std::string::npos);
  EXPECT_EQ(run("fit"), 1);
  EXPECT_EQ(run("no-such-command"), 1);
  EXPECT_EQ(run("--help"), 0);
  // a learning rate this large drives the loss to infinity
  const fs::path cfg = root() / "diverge.json";
  write_run_config(cfg, "400.0", "diverge");
  auto j = nlohmann::json::parse(slurp(cfg));
  j["train"]["learning_rate"] = 1e12;
  std::ofstream(cfg) << j.dump();
  EXPECT_EQ(run("fit --config " + cfg.string()), 2) << last_log();
}

}  // namespace
}  // namespace wildhaz
