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

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "wildhaz/wildhaz.hpp"

namespace {

using wildhaz::CommandOptions;

int run(const std::function<void()>& body) {
  try {
    body();
    return wildhaz::kExitOk;
  } catch (const wildhaz::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return wildhaz::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return wildhaz::kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wildhaz: graph-network models for wildfire occurrence and spread"};
  app.require_subcommand(1);

  CommandOptions opt;
  std::uint64_t seed = 0;
  std::string out;
  int replicates = 0;
  int month = 0;
  std::string regions, panel;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opt.config, "configuration file");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out, "output directory (overrides the config)");
  };

  auto* simulate = app.add_subcommand("simulate", "draw a synthetic panel from a truth file");
  add_common(simulate, true);

  auto* ingest = app.add_subcommand("ingest-check", "validate region and panel files");
  add_common(ingest, false);
  ingest->add_option("--regions", regions, "regions file (instead of --config)");
  ingest->add_option("--panel", panel, "panel file (instead of --config)");

  auto* fit = app.add_subcommand("fit", "fit the occurrence and spread models");
  add_common(fit, true);
  auto* evaluate = app.add_subcommand("evaluate", "scores and Q-Q diagnostics for a fit");
  add_common(evaluate, true);
  auto* hazard = app.add_subcommand("hazard", "hazard metrics and trends for a fit");
  add_common(hazard, true);
  hazard->add_option("--month", month, "1-based month index (default: all months)")->check(CLI::PositiveNumber);
  auto* bootstrap = app.add_subcommand("bootstrap", "stationary-bootstrap refits");
  add_common(bootstrap, true);
  bootstrap->add_option("--replicates", replicates, "replicate count (overrides the config)")
      ->check(CLI::PositiveNumber);
  auto* attribute = app.add_subcommand("attribute", "covariate contribution scores for a fit");
  add_common(attribute, true);
  auto* grid = app.add_subcommand("grid", "hyperparameter grid over the config's candidate lists");
  add_common(grid, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage errors are validation failures; --help exits 0
    return app.exit(e) == 0 ? wildhaz::kExitOk : wildhaz::kExitValidation;
  }

  auto* sub = app.get_subcommands().front();
  if (sub->count("--seed")) opt.seed = seed;
  if (sub->count("--out")) opt.out = out;
  if (sub->get_option_no_throw("--replicates") && sub->count("--replicates")) opt.replicates = replicates;
  if (sub->get_option_no_throw("--month") && sub->count("--month")) opt.month = month;

  auto& log = std::cout;
  if (sub == simulate) {
    return run([&] {
      wildhaz::cmd_simulate(opt.config, opt.seed.value_or(0), opt.out.value_or(opt.config.parent_path()), log);
    });
  }
  if (sub == ingest) {
    return run([&] {
      if (!opt.config.empty()) {
        const auto cfg = wildhaz::resolve_config(opt);
        wildhaz::cmd_ingest_check(cfg.regions_path, cfg.panel_path, log);
      } else {
        if (regions.empty() || panel.empty()) throw wildhaz::ValidationError("give --config or both --regions and --panel");
        wildhaz::cmd_ingest_check(regions, panel, log);
      }
    });
  }
  return run([&] {
    const auto cfg = wildhaz::resolve_config(opt);
    if (sub == fit) wildhaz::cmd_fit(cfg, log);
    else if (sub == evaluate) wildhaz::cmd_evaluate(cfg, log);
    else if (sub == hazard) wildhaz::cmd_hazard(cfg, opt.month, log);
    else if (sub == bootstrap) wildhaz::cmd_bootstrap(cfg, log);
    else if (sub == attribute) wildhaz::cmd_attribute(cfg, log);
    else if (sub == grid) wildhaz::cmd_grid(cfg, log);
  });
}
