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

#ifndef INFOLAB_CRITERIA_HPP
#define INFOLAB_CRITERIA_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "infolab/infomat.hpp"
#include "infolab/matrix.hpp"
#include "infolab/models.hpp"

namespace infolab {

struct CriterionValue {
  double value = 0.0;
  std::size_t retained_rank = 0;
};

/// (1/N) Tr(pinv(H) C), with the trace taken over the eigendirections of H
/// kept by `truncated_pinv(H, rel_cutoff)`.
CriterionValue tic(const SymMatrix& H, const SymMatrix& C, std::size_t N,
                   double rel_cutoff = kDefaultRelCutoff);

/// `tic` with the Fisher matrix in place of H.
CriterionValue tic_fisher(const SymMatrix& F, const SymMatrix& C, std::size_t N,
                          double rel_cutoff = kDefaultRelCutoff);

/// d Tr(C) / (N Tr(F)). With C = alpha F this is d alpha / N.
double trace_ratio_criterion(const SymMatrix& C, const SymMatrix& F, std::size_t N);

/// Tr(C) / Tr(F).
double trace_ratio_raw(const SymMatrix& C, const SymMatrix& F);

/// d / N.
double aic(std::size_t d, std::size_t N);

/// Tr(H).
double flatness(const SymMatrix& H);

/// (1/N) sum_n ||d loss(x_n, y_n) / d x_n||^2.
double sensitivity(const LossOracle& oracle, const Dataset& data);

/// Rank correlation with average ranks for ties. Throws InvalidArgumentError
/// for mismatched or short (< 3) inputs and for constant sequences.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// Average ranks, 1-based.
Vector average_ranks(std::span<const double> xs);

enum class EvalSet { kHeldOut, kTrain };

const char* to_string(EvalSet e);
EvalSet eval_set_from_string(const std::string& name);

struct GapReport {
  // configuration
  double corruption = 0.0;
  int hidden = 0;
  std::size_t seed_index = 0;
  std::string status = "ok";  ///< "ok" or "diverged"
  std::string error;

  double train_loss = 0.0;
  double test_loss = 0.0;
  double gap = 0.0;
  double tic = 0.0;
  double tic_fisher = 0.0;
  double trace_ratio = 0.0;
  double trace_ratio_raw = 0.0;
  double aic = 0.0;
  double flatness = 0.0;
  double sensitivity = 0.0;
  std::size_t retained_rank = 0;
  std::size_t fisher_retained_rank = 0;
  double rel_cutoff = kDefaultRelCutoff;
  std::size_t N = 0;  ///< training samples, the 1/N in every criterion
  std::size_t dim = 0;
};

/// Evaluates every criterion for a trained model. H, F and C come from
/// `eval_data`; the gap is mean_loss(test) - mean_loss(train).
GapReport evaluate_criteria(const LossOracle& model, const Dataset& train_data,
                            const Dataset& test_data, const Dataset& eval_data,
                            double rel_cutoff = kDefaultRelCutoff);

struct GapConfig {
  enum class Sweep { kCorruption, kHidden };
  Sweep sweep = Sweep::kCorruption;
  std::vector<double> corruption_levels = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                           0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<int> hidden_sizes = {0, 2, 4, 8, 16};
  std::size_t seeds = 3;
  std::size_t n_train = 40;
  std::size_t n_test = 1000;
  int d_in = 20;
  int classes = 3;
  double separation = 3.0;
  int hidden = 0;             ///< model width for the corruption sweep
  double corruption = 0.0;    ///< label corruption for the hidden sweep
  double init_scale = 0.1;
  TrainOptions train{1000, 0.5, 40, 0.0};
  double rel_cutoff = kDefaultRelCutoff;
  EvalSet eval_set = EvalSet::kHeldOut;
  bool test_equals_train = false;
  bool cutoff_sweep = false;  ///< runner only: repeat at rel_cutoff 1e-2, 1e-3, 1e-4
  std::uint64_t root_seed = 0;
};

const char* to_string(GapConfig::Sweep s);
GapConfig::Sweep gap_sweep_from_string(const std::string& name);

/// Trains one model per (sweep value, seed) and evaluates every criterion.
/// Seed k draws the class means from derive_seed(root, 2k) and the samples
/// and training stream from derive_seed(derive_seed(root, 2k + 1), value
/// index). Train and test labels are corrupted at the same ratio. Training
/// divergence is recorded in the report's status. Reports are ordered by
/// sweep value, then seed.
std::vector<GapReport> gap_experiment(const GapConfig& config);

struct GapSummary {
  double rho_tic = 0.0;
  double rho_tic_fisher = 0.0;
  double rho_trace_ratio = 0.0;
  double rho_flatness = 0.0;
  double rho_sensitivity = 0.0;
  double rho_gap_sweep = 0.0;  ///< gap against the swept value
  std::size_t used = 0;        ///< reports with status "ok"
};

/// Spearman correlations against the gap over the successful reports.
GapSummary summarize_gap(const std::vector<GapReport>& reports, GapConfig::Sweep sweep);

}  // namespace infolab

#endif  // INFOLAB_CRITERIA_HPP
