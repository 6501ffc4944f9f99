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

// Batch commands behind the command-line front end. Each command reads its
// inputs from disk, writes its reports into the output directory and throws
// on failure; the caller maps exceptions to exit codes.

#pragma once

#include <cstdio>
#include <filesystem>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wildhaz/artifacts.hpp"
#include "wildhaz/attribution.hpp"
#include "wildhaz/bootstrap.hpp"
#include "wildhaz/config.hpp"
#include "wildhaz/csv.hpp"
#include "wildhaz/errors.hpp"
#include "wildhaz/evaluation.hpp"
#include "wildhaz/panel.hpp"
#include "wildhaz/simulate.hpp"
#include "wildhaz/training.hpp"

namespace wildhaz {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2 };

struct CommandOptions {
  fs::path config;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
  std::optional<int> replicates;
  std::optional<int> month;  ///< 1-based
};

inline RunConfig resolve_config(const CommandOptions& o) {
  auto c = load_run_config(o.config);
  if (o.seed) c.seed = c.bootstrap.seed = *o.seed;
  if (o.out) c.output = *o.out;
  if (o.replicates) {
    c.bootstrap.replicates = *o.replicates;
    c.bootstrap.validate();
  }
  return c;
}

// ---------------------------------------------------------------- shared

/// p0 and sigma for every cell, with the global kappa and xi.
struct CellForecasts {
  Eigen::MatrixXd p0;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd m_sigma;
  double kappa = 1.0;
  double xi = 0.2;
};

inline CellForecasts forecast_cells(const OccurrenceModel& occ, const EgpdModel& spread, const WeightedGraph& graph,
                                    const PanelDataset& panel, const DesignTensor& occ_x,
                                    const DesignTensor& spread_x) {
  const auto V = panel.num_regions(), T = panel.num_months();
  CellForecasts f;
  f.p0.resize(V, T);
  f.sigma.resize(V, T);
  f.m_sigma.resize(V, T);
  f.kappa = spread.kappa();
  f.xi = spread.xi();
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto k = static_cast<std::size_t>(t);
    f.p0.col(t) = occ.p0(occ_x.slices[k], graph);
    f.m_sigma.col(t) = spread.log_relative_scale(spread_x.slices[k], graph);
    f.sigma.col(t) = spread.sigma(spread_x.slices[k], graph, panel.regions);
  }
  return f;
}

/// A fitted model applied to a (possibly resampled) panel.
struct FittedContext {
  PanelDataset panel;
  WeightedGraph graph;
  LoadedFit fit;
  DesignTensor occ_x;
  DesignTensor spread_x;
  SplitAssignment split;
  CellForecasts forecasts;
};

inline FittedContext apply_fit(PanelDataset panel, WeightedGraph graph, LoadedFit fit) {
  FittedContext c;
  c.occ_x = model_input(panel, fit.standardizer, fit.occurrence.covariates);
  c.spread_x = model_input(panel, fit.standardizer, fit.spread.covariates);
  c.split = make_split(panel.observed, fit.validation_fraction, derive_seed(fit.seed, 0));
  c.forecasts = forecast_cells(fit.occurrence, fit.spread, graph, panel, c.occ_x, c.spread_x);
  c.panel = std::move(panel);
  c.graph = std::move(graph);
  c.fit = std::move(fit);
  return c;
}

inline FittedContext load_context(const RunConfig& cfg) {
  auto fit = load_fit(cfg.output);
  auto panel = ingest(cfg.regions_path.string(), cfg.panel_path.string());
  auto graph = build_adjacency(panel.regions, fit.adjacency);
  return apply_fit(std::move(panel), std::move(graph), std::move(fit));
}

struct ScoreSet {
  double auc = std::numeric_limits<double>::quiet_NaN();
  double crps = std::numeric_limits<double>::quiet_NaN();
  double twcrps = std::numeric_limits<double>::quiet_NaN();
  std::size_t cells = 0;
  std::size_t positives = 0;
};

/// Occurrence AUC over `cells` and spread scores over its positive responses.
inline ScoreSet score_cells(const PanelDataset& panel, const CellForecasts& f, const CellMask& cells,
                            const TwcrpsScheme& scheme) {
  std::vector<int> labels;
  std::vector<double> scores, y;
  std::vector<EgpdParams> params;
  for (Eigen::Index t = 0; t < panel.num_months(); ++t) {
    for (Eigen::Index s = 0; s < panel.num_regions(); ++s) {
      if (!cells(s, t)) continue;
      const bool fire = panel.response(s, t) > 0.0;
      labels.push_back(fire ? 1 : 0);
      scores.push_back(f.p0(s, t));
      if (fire) {
        y.push_back(panel.response(s, t));
        params.push_back({f.kappa, f.sigma(s, t), f.xi});
      }
    }
  }
  ScoreSet out;
  out.cells = labels.size();
  out.positives = y.size();
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  if (pos > 0 && static_cast<std::size_t>(pos) < labels.size()) out.auc = auc(labels, scores);
  if (!y.empty()) {
    out.crps = crps(y, EgpdForecast{params}, scheme);
    out.twcrps = twcrps(y, EgpdForecast{params}, scheme);
  }
  return out;
}

/// Sorted margin-scale PIT values of the positive responses in `cells`.
inline std::vector<double> sorted_margin_pit(const PanelDataset& panel, const CellForecasts& f,
                                             const CellMask& cells, Margin margin) {
  std::vector<double> z;
  for (Eigen::Index t = 0; t < panel.num_months(); ++t)
    for (Eigen::Index s = 0; s < panel.num_regions(); ++s)
      if (cells(s, t) && panel.response(s, t) > 0.0) {
        z.push_back(to_margin(egpd_cdf(panel.response(s, t), {f.kappa, f.sigma(s, t), f.xi}), margin));
      }
  std::sort(z.begin(), z.end());
  return z;
}

inline std::string architecture_label(const std::vector<LayerSpec>& specs) {
  std::string s;
  for (const auto& l : specs) s += (s.empty() ? "" : ",") + to_string(l.kind) + ":" + std::to_string(l.width);
  return s;
}

// ---------------------------------------------------------------- simulate

inline void cmd_simulate(const fs::path& truth_path, std::uint64_t seed, const fs::path& out, std::ostream& log) {
  nlohmann::json j = read_json(truth_path);
  TruthConfig truth;
  try {
    truth = TruthConfig::from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(truth_path.string() + ": " + e.what());
  }
  const auto sim = simulate(truth, seed);
  fs::create_directories(out);
  write_regions((out / "regions.csv").string(), sim.panel.regions);
  write_panel((out / "panel.csv").string(), sim.panel);
  write_truth_cells((out / "truth_cells.csv").string(), sim);
  write_json(out / "truth.json", {{"seed", seed}, {"truth", truth.to_json()}});
  log << "simulated " << sim.panel.num_regions() << " regions x " << sim.panel.num_months() << " months, "
      << sim.panel.positive().count() << " positive responses -> " << out.string() << '\n';
}

// ---------------------------------------------------------------- ingest

inline IngestReport cmd_ingest_check(const fs::path& regions, const fs::path& panel, std::ostream& log) {
  const auto data = ingest(regions.string(), panel.string());
  const auto report = summarize(data);
  log << report.to_string();
  return report;
}

// ---------------------------------------------------------------- fit

inline TwoStageFit cmd_fit(const RunConfig& cfg, std::ostream& log) {
  const auto panel = ingest(cfg.regions_path.string(), cfg.panel_path.string());
  const auto adjacency = cfg.adjacency_spec();
  const auto graph = build_adjacency(panel.regions, adjacency);
  auto fit = fit_two_stage(panel, graph, cfg.specs(), cfg.train, cfg.seed);
  save_fit(cfg.output, fit, adjacency, cfg.train, {{"config", run_config_json(cfg)}});
  log << "occurrence: best epoch " << fit.occurrence_stage.fit.best_epoch << ", loss "
      << csv::fmt(fit.occurrence_stage.fit.best_loss) << '\n'
      << "spread: best epoch " << fit.spread_stage.fit.best_epoch << ", loss "
      << csv::fmt(fit.spread_stage.fit.best_loss) << ", kappa " << csv::fmt(fit.spread.kappa()) << ", xi "
      << csv::fmt(fit.spread.xi()) << '\n'
      << "artifacts written to " << cfg.output.string() << '\n';
  return fit;
}

// ---------------------------------------------------------------- bootstrap

inline fs::path bootstrap_dir(const fs::path& out) { return out / "bootstrap"; }

inline fs::path replicate_dir(const fs::path& out, int r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "replicate_%03d", r);
  return bootstrap_dir(out) / buf;
}

inline std::vector<Replicate> cmd_bootstrap(const RunConfig& cfg, std::ostream& log) {
  const auto panel = ingest(cfg.regions_path.string(), cfg.panel_path.string());
  const auto adjacency = cfg.adjacency_spec();
  const auto graph = build_adjacency(panel.regions, adjacency);
  const auto standardizer = fit_standardizer(panel, cfg.space_time_covariates);
  std::optional<LoadedFit> main;
  WarmStart warm;
  if (cfg.warm_start_replicates) {
    main = load_fit(cfg.output);
    warm = {&main->occurrence, &main->spread};
  }
  auto reps = bootstrap_fit(panel, graph, cfg.specs(), cfg.bootstrap, cfg.train, standardizer, warm);

  fs::create_directories(bootstrap_dir(cfg.output));
  csv::Writer w((cfg.output / "replicates.csv").string());
  w.row({"replicate", "kappa", "xi", "val_loss_occ", "val_loss_egpd"});
  std::vector<double> kappa, xi, occ, egpd;
  for (const auto& rep : reps) {
    if (!rep.ok()) {
      w.row({std::to_string(rep.index), "NA", "NA", "NA", "NA"});
      log << "replicate " << rep.index << " failed: " << rep.error << '\n';
      continue;
    }
    const auto& f = *rep.fit;
    std::vector<int> months;
    for (auto m : rep.resample.months) months.push_back(static_cast<int>(m + 1));
    save_fit(replicate_dir(cfg.output, rep.index), f, adjacency, cfg.train,
             {{"replicate", rep.index},
              {"replicate_seed", rep.seed},
              {"resample_months", months},
              {"block_lengths", rep.resample.block_lengths}});
    kappa.push_back(f.spread.kappa());
    xi.push_back(f.spread.xi());
    occ.push_back(f.occurrence_stage.fit.best_loss);
    egpd.push_back(f.spread_stage.fit.best_loss);
    w.row({std::to_string(rep.index), csv::fmt(kappa.back()), csv::fmt(xi.back()), csv::fmt(occ.back()),
           csv::fmt(egpd.back())});
  }
  if (kappa.empty()) throw NumericalError("every bootstrap replicate failed");
  w.row({"summary", format_summary(summarize_replicates(kappa)),
         format_summary(summarize_replicates(xi)), format_summary(summarize_replicates(occ)),
         format_summary(summarize_replicates(egpd))});
  log << kappa.size() << " of " << reps.size() << " replicates succeeded\n"
      << "kappa " << format_summary(summarize_replicates(kappa)) << '\n'
      << "xi " << format_summary(summarize_replicates(xi)) << '\n';
  return reps;
}

/// Replicate fits written by `bootstrap`, in replicate order.
inline std::vector<fs::path> replicate_dirs(const fs::path& out) {
  std::vector<fs::path> dirs;
  if (!fs::is_directory(bootstrap_dir(out))) return dirs;
  for (const auto& e : fs::directory_iterator(bootstrap_dir(out)))
    if (e.is_directory() && e.path().filename().string().rfind("replicate_", 0) == 0) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

/// A replicate fit applied to its own resampled panel.
inline FittedContext replicate_context(const PanelDataset& panel, const WeightedGraph& graph, const fs::path& dir) {
  auto fit = load_fit(dir);
  std::vector<std::size_t> months;
  for (int m : fit.metadata.at("resample_months").get<std::vector<int>>()) {
    if (m < 1 || m > panel.num_months()) throw ValidationError(dir.string() + ": resample month out of range");
    months.push_back(static_cast<std::size_t>(m - 1));
  }
  return apply_fit(panel.select_months(months), graph, std::move(fit));
}

// ---------------------------------------------------------------- evaluate

struct EvaluationReport {
  ScoreSet validation;
  ScoreSet all;
  std::vector<std::pair<int, ScoreSet>> replicate_validation;
  QQTable qq_exponential;
  QQTable qq_gaussian;
  std::optional<ToleranceBand> band_exponential;
  std::optional<ToleranceBand> band_gaussian;
};

inline EvaluationReport cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  const auto ctx = load_context(cfg);
  const auto scheme = cfg.twcrps_scheme();
  EvaluationReport rep;
  rep.validation = score_cells(ctx.panel, ctx.forecasts, ctx.split.mask(Subset::validation), scheme);
  rep.all = score_cells(ctx.panel, ctx.forecasts, ctx.split.mask(Subset::all), scheme);

  const CellMask observed = ctx.panel.observed;
  for (auto margin : {Margin::exponential, Margin::gaussian}) {
    QQTable t;
    t.empirical = sorted_margin_pit(ctx.panel, ctx.forecasts, observed, margin);
    if (t.empirical.size() < 2) throw ValidationError("evaluate: fewer than two positive responses");
    for (double p : plotting_positions(t.empirical.size())) t.theoretical.push_back(margin_quantile(p, margin));
    (margin == Margin::exponential ? rep.qq_exponential : rep.qq_gaussian) = std::move(t);
  }

  std::vector<std::vector<double>> rep_exp, rep_gauss;
  for (const auto& dir : replicate_dirs(cfg.output)) {
    const auto rc = replicate_context(ctx.panel, ctx.graph, dir);
    const int r = rc.fit.metadata.at("replicate").get<int>();
    rep.replicate_validation.emplace_back(r, score_cells(rc.panel, rc.forecasts, rc.split.mask(Subset::validation), scheme));
    rep_exp.push_back(sorted_margin_pit(rc.panel, rc.forecasts, rc.panel.observed, Margin::exponential));
    rep_gauss.push_back(sorted_margin_pit(rc.panel, rc.forecasts, rc.panel.observed, Margin::gaussian));
  }
  const auto probs = plotting_positions(rep.qq_exponential.empirical.size());
  if (!rep_exp.empty()) {
    rep.band_exponential = tolerance_band(rep_exp, probs);
    rep.band_gaussian = tolerance_band(rep_gauss, probs);
  }

  fs::create_directories(cfg.output);
  csv::Writer scores((cfg.output / "scores.csv").string());
  scores.row({"metric", "value", "replicate"});
  auto emit = [&](const std::string& tag, const ScoreSet& s, const std::string& replicate) {
    scores.row({"auc_" + tag, csv::fmt(s.auc), replicate});
    scores.row({"crps_" + tag, csv::fmt(s.crps), replicate});
    scores.row({"twcrps_" + tag, csv::fmt(s.twcrps), replicate});
  };
  emit("validation", rep.validation, "main");
  emit("all", rep.all, "main");
  for (const auto& [r, s] : rep.replicate_validation) emit("validation", s, std::to_string(r));

  if (!rep.replicate_validation.empty()) {
    csv::Writer summary((cfg.output / "scores_summary.csv").string());
    summary.row({"metric", "summary"});
    auto put = [&](const char* name, auto get) {
      std::vector<double> v;
      for (const auto& [r, s] : rep.replicate_validation)
        if (std::isfinite(get(s))) v.push_back(get(s));
      summary.row({name, v.empty() ? "NA" : format_summary(summarize_replicates(v))});
    };
    put("auc_validation", [](const ScoreSet& s) { return s.auc; });
    put("crps_validation", [](const ScoreSet& s) { return s.crps; });
    put("twcrps_validation", [](const ScoreSet& s) { return s.twcrps; });
  }

  auto write_qq = [&](const char* file, const QQTable& t, const std::optional<ToleranceBand>& band) {
    csv::Writer w((cfg.output / file).string());
    w.row({"empirical", "theoretical", "band_lo", "band_hi"});
    for (std::size_t i = 0; i < t.empirical.size(); ++i) {
      w.row({csv::fmt(t.empirical[i]), csv::fmt(t.theoretical[i]), band ? csv::fmt(band->lower[i]) : "NA",
             band ? csv::fmt(band->upper[i]) : "NA"});
    }
  };
  write_qq("qq_exponential.csv", rep.qq_exponential, rep.band_exponential);
  write_qq("qq_gaussian.csv", rep.qq_gaussian, rep.band_gaussian);
  write_json(cfg.output / "evaluation_metadata.json",
             {{"twcrps_thresholds", scheme.thresholds},
              {"twcrps_upper_index", scheme.upper_index},
              {"twcrps_normalization_index", scheme.normalization_index},
              {"pit_clamp", kPitClamp},
              {"plotting_positions", "i/(n+1)"},
              {"replicates", rep.replicate_validation.size()}});

  log << "validation: auc " << csv::fmt(rep.validation.auc) << ", crps " << csv::fmt(rep.validation.crps)
      << ", twcrps " << csv::fmt(rep.validation.twcrps) << '\n';
  return rep;
}

// ---------------------------------------------------------------- hazard

struct HazardReport {
  std::vector<HazardRow> rows;
  std::vector<std::pair<std::string, TrendLine>> trends;
};

inline HazardReport cmd_hazard(const RunConfig& cfg, std::optional<int> month, std::ostream& log) {
  const auto ctx = load_context(cfg);
  const auto T = ctx.panel.num_months();
  if (month && (*month < 1 || *month > T)) {
    throw ValidationError("month " + std::to_string(*month) + " outside 1.." + std::to_string(T));
  }
  HazardReport rep;
  Eigen::MatrixXd p0(ctx.panel.num_regions(), T), sev(ctx.panel.num_regions(), T), ch(ctx.panel.num_regions(), T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto rows = hazard_metrics(ctx.fit.occurrence, ctx.fit.spread, ctx.graph, ctx.panel, ctx.occ_x,
                                     ctx.spread_x, t);
    for (std::size_t s = 0; s < rows.size(); ++s) {
      const auto i = static_cast<Eigen::Index>(s);
      p0(i, t) = rows[s].p0;
      sev(i, t) = rows[s].log_rel_severity;
      ch(i, t) = rows[s].ch;
    }
    if (!month || *month == t + 1) rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());
  }
  fs::create_directories(cfg.output);
  csv::Writer w((cfg.output / "hazard.csv").string());
  w.row({"region_id", "month", "p0", "log_rel_severity", "ch"});
  for (const auto& r : rep.rows) {
    w.row({std::to_string(r.region_id), std::to_string(r.month), csv::fmt(r.p0), csv::fmt(r.log_rel_severity),
           csv::fmt(r.ch)});
  }
  if (T >= 2) {
    csv::Writer tw((cfg.output / "trend.csv").string());
    tw.row({"metric", "slope", "intercept"});
    for (const auto& [name, metric] : {std::pair<std::string, const Eigen::MatrixXd*>{"p0", &p0},
                                       {"log_rel_severity", &sev},
                                       {"ch", &ch}}) {
      const auto series = spatial_mean(*metric, ctx.panel.observed);
      std::vector<double> finite;
      for (double v : series)
        if (std::isfinite(v)) finite.push_back(v);
      if (finite.size() != series.size()) {
        log << "trend for " << name << " skipped: some months have no observed region\n";
        continue;
      }
      const auto line = trend(series);
      rep.trends.emplace_back(name, line);
      tw.row({name, csv::fmt(line.slope), csv::fmt(line.intercept)});
    }
  }
  log << rep.rows.size() << " hazard rows written to " << (cfg.output / "hazard.csv").string() << '\n';
  return rep;
}

// ---------------------------------------------------------------- attribute

struct AttributionReport {
  std::vector<CovariateRank> p0;
  std::vector<CovariateRank> sigma;
};

inline AttributionReport cmd_attribute(const RunConfig& cfg, std::ostream& log) {
  const auto ctx = load_context(cfg);
  fs::create_directories(cfg.output);
  csv::Writer sw((cfg.output / "attribution_scores.csv").string());
  sw.row({"covariate", "region_id", "month", "target", "score"});
  AttributionReport rep;
  auto run = [&](Target target, const NetworkWeights& net, const DesignTensor& x) {
    std::vector<std::vector<double>> pooled(x.names.size());
    for (std::size_t t = 0; t < x.slices.size(); ++t) {
      const Eigen::MatrixXd cs = contribution_scores(net, ctx.graph, x.slices[t], target);
      for (Eigen::Index i = 0; i < cs.cols(); ++i) {
        for (Eigen::Index s = 0; s < cs.rows(); ++s) {
          pooled[static_cast<std::size_t>(i)].push_back(cs(s, i));
          sw.row({x.names[static_cast<std::size_t>(i)], std::to_string(ctx.panel.regions[static_cast<std::size_t>(s)].id),
                  std::to_string(t + 1), to_string(target), csv::fmt(cs(s, i))});
        }
      }
    }
    return rank_covariates(pooled, x.names);
  };
  rep.p0 = run(Target::p0, ctx.fit.occurrence.network, ctx.occ_x);
  rep.sigma = run(Target::sigma, ctx.fit.spread.network, ctx.spread_x);

  csv::Writer rw((cfg.output / "attribution_ranking.csv").string());
  rw.row({"covariate", "target", "iqr", "rank"});
  csv::Writer bw((cfg.output / "attribution_boxplot.csv").string());
  bw.row({"covariate", "target", "q1", "median", "q3", "whisker_low", "whisker_high"});
  for (auto [target, ranks] : {std::pair{Target::p0, &rep.p0}, std::pair{Target::sigma, &rep.sigma}}) {
    for (const auto& r : *ranks) {
      rw.row({r.name, to_string(target), csv::fmt(r.iqr()), std::to_string(r.rank)});
      bw.row({r.name, to_string(target), csv::fmt(r.box.q1), csv::fmt(r.box.median), csv::fmt(r.box.q3),
              csv::fmt(r.box.whisker_low), csv::fmt(r.box.whisker_high)});
    }
  }
  write_json(cfg.output / "attribution_metadata.json",
             {{"reference", "all standardized covariates zero (marginal means)"},
              {"p0_gradient", "dp0/dx"},
              {"sigma_gradient", "d log(sigma/sqrt(area))/dx, log-link scale"},
              {"fallback", "x*g(x) when |g(x)-g(0)| < 1e-10 (1+|g(x)|)"},
              {"dispersion", "interquartile range"}});
  log << "top covariate for p0: " << rep.p0.front().name << ", for sigma: " << rep.sigma.front().name << '\n';
  return rep;
}

// ---------------------------------------------------------------- grid

struct GridRun {
  std::string stage;
  AdjacencySpec adjacency;
  double learning_rate = 0.0;
  std::vector<LayerSpec> architecture;
  double validation_auc = std::numeric_limits<double>::quiet_NaN();
  double validation_nll = std::numeric_limits<double>::quiet_NaN();
  int best_epoch = 0;
  bool selected = false;
};

/// Occurrence candidates are ranked by validation AUC (higher is better),
/// spread candidates by validation negative log-likelihood (lower is better).
inline std::vector<GridRun> cmd_grid(const RunConfig& cfg, std::ostream& log) {
  if (!(cfg.train.validation_fraction > 0.0)) throw ValidationError("grid: selection needs a validation set");
  const auto panel = ingest(cfg.regions_path.string(), cfg.panel_path.string());
  const auto standardizer = fit_standardizer(panel, cfg.space_time_covariates);
  const auto inputs = make_inputs(panel, standardizer, cfg.space_time_covariates);
  const auto split = make_split(panel.observed, cfg.train.validation_fraction, derive_seed(cfg.seed, 0));
  const CellMask val = split.mask(Subset::validation);

  std::vector<GridRun> runs;
  for (const auto& adjacency : cfg.adjacency.candidates()) {
    const auto graph = build_adjacency(panel.regions, adjacency);
    for (double lr : cfg.learning_rates) {
      auto train = cfg.train;
      train.learning_rate = lr;
      for (const auto& arch : cfg.occurrence_candidates) {
        OccurrenceModel m;
        m.covariates = inputs.occurrence.names;
        std::mt19937_64 rng(derive_seed(cfg.seed, 1));
        m.network = init_network(arch, inputs.occurrence.width(), rng);
        const auto stage = fit_occurrence(m, inputs.occurrence, graph, panel, split, train);
        std::vector<int> labels;
        std::vector<double> scores;
        for (Eigen::Index t = 0; t < panel.num_months(); ++t) {
          const Eigen::VectorXd p = m.p0(inputs.occurrence.slices[static_cast<std::size_t>(t)], graph);
          for (Eigen::Index s = 0; s < panel.num_regions(); ++s)
            if (val(s, t)) {
              labels.push_back(panel.response(s, t) > 0.0 ? 1 : 0);
              scores.push_back(p[s]);
            }
        }
        GridRun r{"occurrence", adjacency, lr, arch};
        const auto pos = std::count(labels.begin(), labels.end(), 1);
        if (pos > 0 && static_cast<std::size_t>(pos) < labels.size()) r.validation_auc = auc(labels, scores);
        r.validation_nll = stage.fit.best_loss;
        r.best_epoch = stage.fit.best_epoch;
        runs.push_back(r);
      }
      for (const auto& arch : cfg.spread_candidates) {
        EgpdModel m;
        m.covariates = inputs.spread.names;
        std::mt19937_64 rng(derive_seed(cfg.seed, 2));
        m.network = init_network(arch, inputs.spread.width(), rng);
        m.log_kappa = std::log(kInitialKappa);
        m.log_xi = std::log(kInitialXi);
        const auto stage = fit_spread(m, inputs.spread, graph, panel, split, train);
        GridRun r{"spread", adjacency, lr, arch};
        r.validation_nll = stage.fit.best_loss;
        r.best_epoch = stage.fit.best_epoch;
        runs.push_back(r);
      }
    }
  }

  auto select = [&](const std::string& stage, auto better) {
    GridRun* best = nullptr;
    for (auto& r : runs)
      if (r.stage == stage && (!best || better(r, *best))) best = &r;
    if (best) best->selected = true;
    return best;
  };
  auto* occ = select("occurrence", [](const GridRun& a, const GridRun& b) {
    if (std::isnan(b.validation_auc)) return !std::isnan(a.validation_auc);
    return a.validation_auc > b.validation_auc;
  });
  auto* spr = select("spread", [](const GridRun& a, const GridRun& b) { return a.validation_nll < b.validation_nll; });

  fs::create_directories(cfg.output);
  csv::Writer w((cfg.output / "grid.csv").string());
  w.row({"stage", "run", "lambda", "alpha", "delta", "learning_rate", "architecture", "validation_auc",
         "validation_nll", "best_epoch", "selected"});
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& r = runs[k];
    w.row({r.stage, std::to_string(k + 1), csv::fmt(r.adjacency.lambda), std::to_string(r.adjacency.alpha),
           csv::fmt(r.adjacency.delta), csv::fmt(r.learning_rate), architecture_label(r.architecture),
           csv::fmt(r.validation_auc), csv::fmt(r.validation_nll), std::to_string(r.best_epoch),
           r.selected ? "1" : "0"});
  }
  auto describe = [](const GridRun* r) -> nlohmann::json {
    if (!r) return nullptr;
    return {{"adjacency", adjacency_json(r->adjacency)},
            {"learning_rate", r->learning_rate},
            {"layers", detail::layers_json(r->architecture)},
            {"validation_auc", std::isnan(r->validation_auc) ? nlohmann::json(nullptr) : nlohmann::json(r->validation_auc)},
            {"validation_nll", r->validation_nll}};
  };
  write_json(cfg.output / "grid_selection.json",
             {{"seed", cfg.seed}, {"occurrence", describe(occ)}, {"spread", describe(spr)}});
  log << runs.size() << " grid runs recorded\n";
  return runs;
}

}  // namespace wildhaz
