// Copyright 2026 The infolab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "infolab/error.hpp"
#include "infolab/experiments.hpp"

namespace {

using infolab::ErrorKind;
using infolab::RunConfig;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNumericalFailure:
    case ErrorKind::kDegenerateSpectrum:
    case ErrorKind::kDivergence:
      return 3;
    case ErrorKind::kInfeasible:
      return 4;
    default:
      return 2;
  }
}

void add_train_options(CLI::App* sub, infolab::TrainOptions& t) {
  sub->add_option("--train-steps", t.steps, "SGD steps")->capture_default_str();
  sub->add_option("--train-stepsize", t.stepsize, "SGD stepsize")->capture_default_str();
  sub->add_option("--train-batch", t.batch, "mini-batch size")->capture_default_str();
  sub->add_option("--train-momentum", t.momentum, "heavy-ball momentum")->capture_default_str();
}

struct EnumFlags {
  std::string theta0_mode;
  std::string gamma_mode;
  std::string family;
  std::string fisher_mode;
  std::string sweep;
  std::string eval_set;
  bool unbalanced = false;
};

void add_table_options(CLI::App* sub, infolab::TableConfig& c, EnumFlags& e) {
  sub->add_option("--d", c.d, "problem dimension")->capture_default_str();
  sub->add_option("--betas", c.betas, "noise exponents, S proportional to H^beta")
      ->capture_default_str();
  sub->add_option("--eps", c.eps, "suboptimality thresholds")->capture_default_str();
  sub->add_option("--target-subopt", c.theta0.target_subopt,
                  "initial suboptimality for theta0 mode unit-subopt-uniform")
      ->capture_default_str();
  sub->add_option("--theta0", c.theta0.explicit_theta, "explicit theta0 (mode explicit)");
  sub->add_option("--alpha-lo", c.alpha_lo, "smallest stepsize")->capture_default_str();
  sub->add_option("--alpha-hi", c.alpha_hi, "largest stepsize")->capture_default_str();
  sub->add_option("--points-per-decade", c.points_per_decade, "stepsize grid density")
      ->capture_default_str();
  sub->add_option("--gamma-mode", e.gamma_mode, "fixed or grid")
      ->check(CLI::IsMember({"fixed", "grid"}));
  sub->add_option("--gamma", c.gamma, "Polyak momentum for gamma mode fixed")->capture_default_str();
  sub->add_option("--gamma-grid", c.gamma_grid, "Polyak momenta for gamma mode grid")
      ->capture_default_str();
  sub->add_option("--noise-multiplier", c.noise_multiplier, "scales S")->capture_default_str();
}

void apply_enums(RunConfig& rc, const EnumFlags& e) {
  if (auto* t = std::get_if<infolab::TableConfig>(&rc.params)) {
    if (!e.theta0_mode.empty()) t->theta0.mode = infolab::theta0_mode_from_string(e.theta0_mode);
    if (!e.gamma_mode.empty()) t->gamma_mode = infolab::gamma_mode_from_string(e.gamma_mode);
  } else if (auto* i = std::get_if<infolab::InfomatConfig>(&rc.params)) {
    if (!e.family.empty()) i->family = infolab::family_from_string(e.family);
    if (!e.fisher_mode.empty()) {
      for (auto m : {infolab::FisherMode::kAuto, infolab::FisherMode::kExact,
                     infolab::FisherMode::kClosedForm, infolab::FisherMode::kMonteCarlo})
        if (e.fisher_mode == infolab::to_string(m)) i->fisher_mode = m;
    }
  } else if (auto* s = std::get_if<infolab::SimilarityConfig>(&rc.params)) {
    if (e.unbalanced) s->balanced_noise = false;
  } else if (auto* g = std::get_if<infolab::GapConfig>(&rc.params)) {
    if (!e.sweep.empty()) g->sweep = infolab::gap_sweep_from_string(e.sweep);
    if (!e.eval_set.empty()) g->eval_set = infolab::eval_set_from_string(e.eval_set);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"infolab: curvature and noise matrices, limit cycles of noisy gradient methods, "
               "and generalization-gap estimators"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  app.set_config("--config", "", "INI/TOML file; keys of a subcommand go in its [section]");
  app.set_version_flag("--version", infolab::library_version());

  std::uint64_t seed = 0;
  std::string out_dir;
  std::string replay;
  double cutoff = infolab::kDefaultRelCutoff;
  bool dry_run = false;
  EnumFlags enums;
  auto* seed_opt = app.add_option("--seed", seed, "root seed");
  auto* cutoff_opt =
      app.add_option("--cutoff", cutoff, "relative eigenvalue cutoff for pseudo-inverses")
          ->capture_default_str();
  app.add_option("--out", out_dir, "output directory (default out/<experiment>)");
  app.add_option("--theta0-mode", enums.theta0_mode, "ones, unit-subopt-uniform or explicit")
      ->check(CLI::IsMember({"ones", "unit-subopt-uniform", "explicit"}));
  app.add_option("--replay", replay, "rerun the configuration recorded in a manifest.json");
  app.add_flag("--dry-run", dry_run, "print the effective configuration and exit");

  std::map<std::string, RunConfig> configs;
  std::map<std::string, CLI::App*> subs;
  for (const char* name :
       {"table1", "table2", "limit-cycles", "bounds", "infomat", "similarity", "gap"}) {
    configs.emplace(name, infolab::default_run_config(name));
  }

  {
    auto* s = app.add_subcommand("table1", "steps to reach each threshold, per method and noise");
    add_table_options(s, std::get<infolab::TableConfig>(configs["table1"].params), enums);
    subs["table1"] = s;
    s = app.add_subcommand("table2", "stepsizes reaching each threshold in the fewest steps");
    add_table_options(s, std::get<infolab::TableConfig>(configs["table2"].params), enums);
    subs["table2"] = s;
  }
  {
    auto& c = std::get<infolab::LimitCycleConfig>(configs["limit-cycles"].params);
    auto* s = app.add_subcommand("limit-cycles", "closed-form stationary values vs the recursion");
    s->add_option("--d", c.d)->capture_default_str();
    s->add_option("--betas", c.betas)->capture_default_str();
    s->add_option("--sg-alphas", c.sg_alphas)->capture_default_str();
    s->add_option("--newton-alphas", c.newton_alphas)->capture_default_str();
    s->add_option("--polyak-alphas", c.polyak_alphas)->capture_default_str();
    s->add_option("--polyak-gammas", c.polyak_gammas)->capture_default_str();
    subs["limit-cycles"] = s;
  }
  {
    auto& c = std::get<infolab::BoundsConfig>(configs["bounds"].params);
    auto* s = app.add_subcommand("bounds", "distribution-mismatch bounds on random discrete trials");
    s->add_option("--trials", c.trials)->capture_default_str();
    s->add_option("--support-x", c.support_x, "input points in the support")->capture_default_str();
    s->add_option("--d-in", c.d_in)->capture_default_str();
    s->add_option("--classes", c.classes)->capture_default_str();
    s->add_option("--param-scale", c.param_scale)->capture_default_str();
    s->add_option("--input-scale", c.input_scale)->capture_default_str();
    s->add_option("--mismatch", c.mismatch, "log-scale perturbation of p relative to q")
        ->capture_default_str();
    s->add_flag("--identical", c.identical, "use p == q");
    subs["bounds"] = s;
  }
  {
    auto& c = std::get<infolab::InfomatConfig>(configs["infomat"].params);
    auto* s = app.add_subcommand("infomat", "H, F, C and S of a fitted model");
    s->add_option("--family", enums.family, "gaussian-mean, ols, softmax-linear or softmax-mlp")
        ->check(CLI::IsMember({"gaussian-mean", "ols", "softmax-linear", "softmax-mlp"}));
    s->add_option("--data", c.data_path, "dataset CSV (synthetic data when omitted)");
    s->add_option("--n", c.n)->capture_default_str();
    s->add_option("--d-in", c.d_in)->capture_default_str();
    s->add_option("--d-out", c.d_out, "classes or regression outputs")->capture_default_str();
    s->add_option("--hidden", c.hidden)->capture_default_str();
    s->add_option("--noise-sigma", c.noise_sigma)->capture_default_str();
    s->add_option("--separation", c.separation)->capture_default_str();
    add_train_options(s, c.train);
    s->add_option("--fisher-mode", enums.fisher_mode, "auto, exact, closed-form or monte-carlo")
        ->check(CLI::IsMember({"auto", "exact", "closed-form", "monte-carlo"}));
    s->add_option("--fisher-draws", c.fisher_draws)->capture_default_str();
    subs["infomat"] = s;
  }
  {
    auto& c = std::get<infolab::SimilarityConfig>(configs["similarity"].params);
    auto* s = app.add_subcommand("similarity", "scale and angle similarity of C and H on OLS");
    s->add_option("--n", c.n)->capture_default_str();
    s->add_option("--d-in", c.d_in)->capture_default_str();
    s->add_option("--d-out", c.d_out)->capture_default_str();
    s->add_option("--sigmas", c.sigmas)->capture_default_str();
    s->add_flag("--unbalanced", enums.unbalanced, "Gaussian residuals instead of +-sigma pairs");
    subs["similarity"] = s;
  }
  {
    auto& c = std::get<infolab::GapConfig>(configs["gap"].params);
    auto* s = app.add_subcommand("gap", "generalization gap against TIC, flatness and friends");
    s->add_option("--sweep", enums.sweep, "corruption or hidden")
        ->check(CLI::IsMember({"corruption", "hidden"}));
    s->add_option("--corruption-levels", c.corruption_levels)->capture_default_str();
    s->add_option("--hidden-sizes", c.hidden_sizes)->capture_default_str();
    s->add_option("--seeds", c.seeds)->capture_default_str();
    s->add_option("--n-train", c.n_train)->capture_default_str();
    s->add_option("--n-test", c.n_test)->capture_default_str();
    s->add_option("--d-in", c.d_in)->capture_default_str();
    s->add_option("--classes", c.classes)->capture_default_str();
    s->add_option("--separation", c.separation)->capture_default_str();
    s->add_option("--hidden", c.hidden, "model width for the corruption sweep")
        ->capture_default_str();
    s->add_option("--corruption", c.corruption, "label corruption for the hidden sweep")
        ->capture_default_str();
    s->add_option("--init-scale", c.init_scale)->capture_default_str();
    add_train_options(s, c.train);
    s->add_option("--eval-set", enums.eval_set, "held-out or train")
        ->check(CLI::IsMember({"held-out", "train"}));
    s->add_flag("--test-equals-train", c.test_equals_train);
    s->add_flag("--cutoff-sweep", c.cutoff_sweep, "repeat at cutoffs 1e-2, 1e-3, 1e-4");
    subs["gap"] = s;
  }

  // list options also take comma-separated values
  for (auto& [name, sub] : subs)
    for (CLI::Option* opt : sub->get_options())
      if (opt->get_items_expected_max() > 1) opt->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << infolab::error_record("config", e.what(), 2) << "\n";
    return 2;
  }

  try {
    infolab::RunSummary summary;
    if (!replay.empty()) {
      summary = infolab::replay_manifest(replay, out_dir);
    } else {
      std::string chosen;
      for (const auto& [name, sub] : subs)
        if (sub->parsed()) chosen = name;
      if (chosen.empty()) {
        std::cerr << app.help();
        std::cerr << infolab::error_record("config", "no subcommand given", 2) << "\n";
        return 2;
      }
      RunConfig rc = configs.at(chosen);
      apply_enums(rc, enums);
      if (seed_opt->count() > 0) rc.root_seed = seed;
      if (cutoff_opt->count() > 0) rc.rel_cutoff = cutoff;
      rc.out_dir = out_dir.empty() ? "out/" + chosen : out_dir;
      if (dry_run) {
        std::cout << infolab::run_config_to_json(rc) << "\n";
        return 0;
      }
      summary = infolab::run_experiment(rc);
    }
    for (const std::string& line : summary.lines) std::cout << line << "\n";
    return 0;
  } catch (const infolab::Error& e) {
    const int code = exit_code_for(e.kind());
    std::cerr << infolab::error_record(infolab::to_string(e.kind()), e.what(), code) << "\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << infolab::error_record("internal", e.what(), 3) << "\n";
    return 3;
  }
}
