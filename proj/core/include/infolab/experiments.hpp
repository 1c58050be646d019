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

#ifndef INFOLAB_EXPERIMENTS_HPP
#define INFOLAB_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "infolab/bounds.hpp"
#include "infolab/criteria.hpp"
#include "infolab/quadsim.hpp"

namespace infolab {

// ---------------------------------------------------------------------------
// Table protocol

enum class GammaMode { kFixed, kGrid };

const char* to_string(GammaMode m);
GammaMode gamma_mode_from_string(const std::string& name);

struct TableConfig {
  int d = 20;
  std::vector<int> betas = {1, 0, -1};
  std::vector<double> eps = {1.0, 0.1, 0.01};
  Theta0Spec theta0;
  double alpha_lo = 1e-5;
  double alpha_hi = 2.0;
  int points_per_decade = 60;
  GammaMode gamma_mode = GammaMode::kFixed;
  double gamma = 0.8;
  std::vector<double> gamma_grid = default_gamma_grid();
  double noise_multiplier = 1.0;
};

struct TableCell {
  double eps = 0.0;
  Optimizer method = Optimizer::kSG;
  int beta = 0;
  std::string outcome;  ///< step count, "never" or "diverged"
  std::int64_t steps = -1;
  double alpha = 0.0;
  double gamma = 0.0;
  std::optional<std::int64_t> ref_steps;
  std::optional<double> ref_alpha;
};

struct TableResult {
  TableConfig config;
  std::vector<TableCell> cells;  ///< ordered by eps, method (SG, Newton, Polyak), beta

  const TableCell& at(double eps, Optimizer method, int beta) const;
};

/// Published step counts and stepsizes of the benchmark, keyed by
/// (eps, method, beta) for eps in {1, 0.1, 0.01} and beta in {1, 0, -1}.
std::optional<std::int64_t> reference_steps(double eps, Optimizer method, int beta);
std::optional<double> reference_alpha(double eps, Optimizer method, int beta);

/// Rounds to one significant digit, e.g. 4.6e-3 -> 5e-3.
double round_one_digit(double x);
bool same_one_digit(double a, double b);

/// Cells no grid point can fill are marked "never" or "diverged"; throws
/// InfeasibleError only if every cell is empty.
TableResult run_table(const TableConfig& config);

std::string table1_markdown(const TableResult& r);
std::string table2_markdown(const TableResult& r);
std::string table_csv(const TableResult& r);

// ---------------------------------------------------------------------------
// Limit cycles

struct LimitCycleConfig {
  int d = 20;
  std::vector<int> betas = {1, 0, -1};
  std::vector<double> sg_alphas = {1e-4, 5e-4, 1e-3, 3e-3, 4.5e-3};
  std::vector<double> newton_alphas = {0.05, 0.2, 0.5, 1.0};
  std::vector<double> polyak_alphas = {1e-4, 1e-3};
  std::vector<double> polyak_gammas = {0.5, 0.8, 0.9, 0.95};
};

struct LimitCycleRow {
  Optimizer method = Optimizer::kSG;
  int beta = 0;
  double alpha = 0.0;
  double gamma = 0.0;
  double closed_form = 0.0;
  double recursion = 0.0;   ///< 1/2 Tr(H Sigma_inf) from iterating the moment recursion
  double lyapunov = 0.0;    ///< 1/2 Tr(H X) from the Lyapunov solver
  double abs_diff = 0.0;    ///< |closed_form - recursion|
  double lyapunov_residual = 0.0;  ///< SG / Newton only, 0 for Polyak
  std::int64_t iterations = 0;
};

struct LimitCycleResult {
  std::vector<LimitCycleRow> rows;
  double max_abs_diff = 0.0;
  double max_lyapunov_residual = 0.0;
};

LimitCycleResult run_limit_cycles(const LimitCycleConfig& config);

// ---------------------------------------------------------------------------
// Distribution-mismatch bounds

struct BoundsConfig {
  std::size_t trials = 200;
  std::size_t support_x = 4;  ///< input points; every class is paired with each
  int d_in = 2;
  int classes = 3;
  double param_scale = 1.0;
  double input_scale = 1.0;
  double mismatch = 1.0;  ///< log-scale of the random perturbation turning q into p
  bool identical = false; ///< p == q
};

struct BoundsResult {
  std::vector<BoundReport> reports;  ///< backward then forward per trial
  std::size_t violations = 0;        ///< min_slack < -1e-9
  double min_slack = 0.0;
  double max_identical_dist = 0.0;   ///< max Frobenius distance between H, F, C when p == q
};

BoundsResult run_bounds(const BoundsConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Information matrices

struct InfomatConfig {
  Family family = Family::kSoftmaxLinear;
  std::string data_path;  ///< CSV; empty means synthetic
  std::size_t n = 200;
  int d_in = 3;
  int d_out = 3;          ///< classes or regression outputs
  int hidden = 4;
  double noise_sigma = 1.0;
  double separation = 2.0;
  TrainOptions train{500, 0.2, 200, 0.0};
  FisherMode fisher_mode = FisherMode::kAuto;
  std::size_t fisher_draws = 0;
};

struct InfomatResult {
  LossOracle model = LossOracle::gaussian_mean(1);
  Dataset data;
  InfoMatrixSet info;
};

/// Fits the model (sample mean for GaussianMean, least squares for OLS, SGD
/// for the softmax families) and computes H, F, C and S on the data.
InfomatResult run_infomat(const InfomatConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Similarity of C and H on linear regression

struct SimilarityConfig {
  std::size_t n = 20000;
  int d_in = 3;
  int d_out = 2;
  std::vector<double> sigmas = {0.25, 0.5, 1.0, 2.0, 4.0};
  bool balanced_noise = true;  ///< residuals +-sigma sqrt(p) e_k per input
};

struct SimilarityRow {
  double sigma = 0.0;
  double r_data = 0.0;     ///< Tr(C) / Tr(H) on the sampled data at W*
  double s_data = 0.0;
  double r_closed = 0.0;   ///< from the population closed forms
  double s_closed = 0.0;
  double r_fh = 0.0;
  double s_fh = 0.0;
};

std::vector<SimilarityRow> run_similarity(const SimilarityConfig& config, std::uint64_t seed);

/// Linear-regression data at W*: inputs N(0, I); with `balanced` each input
/// appears with residuals +-sigma sqrt(p) e_k (2p copies), otherwise
/// residuals are N(0, sigma^2 I).
Dataset make_ols_dataset(const LossOracle& truth, std::size_t n, double sigma, bool balanced,
                         Rng& rng);

// ---------------------------------------------------------------------------
// Runner

using ExperimentParams = std::variant<TableConfig, LimitCycleConfig, BoundsConfig, InfomatConfig,
                                      SimilarityConfig, GapConfig>;

struct RunConfig {
  std::string experiment;  ///< table1, table2, limit-cycles, bounds, infomat, similarity, gap
  std::uint64_t root_seed = 0;
  std::string out_dir = "out";
  double rel_cutoff = kDefaultRelCutoff;
  ExperimentParams params;
};

/// Default parameter block for an experiment name; throws ConfigError for
/// unknown names.
RunConfig default_run_config(const std::string& experiment);

/// JSON with every effective value, and its inverse. Unknown keys and
/// mistyped values raise ConfigError; missing keys keep their defaults.
std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const std::string& text);

struct RunSummary {
  std::vector<std::string> files;  ///< written paths, relative to out_dir
  std::vector<std::string> lines;  ///< human-readable summary
};

/// Runs the experiment and writes its outputs plus manifest.json into
/// config.out_dir (created if missing).
RunSummary run_experiment(const RunConfig& config);

/// Reads manifest.json and reruns the recorded configuration. A non-empty
/// `out_dir` replaces the recorded output directory.
RunSummary replay_manifest(const std::string& manifest_path, const std::string& out_dir = "");

/// {"status": "error", "kind": ..., "message": ..., "exit_code": ...}
std::string error_record(const std::string& kind, const std::string& message, int exit_code);

std::string library_version();

}  // namespace infolab

#endif  // INFOLAB_EXPERIMENTS_HPP
