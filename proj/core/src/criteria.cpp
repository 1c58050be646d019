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

#include "infolab/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "infolab/error.hpp"
#include "infolab/rng.hpp"
#include "parallel.hpp"

namespace infolab {

namespace {

CriterionValue truncated_trace(const SymMatrix& A, const SymMatrix& C, std::size_t N,
                               double rel_cutoff) {
  if (A.dim() != C.dim()) throw DimensionError("criterion: matrix dimensions differ");
  if (N == 0) throw InvalidArgumentError("criterion: N must be >= 1");
  const EigenDecomp e = eigh(A);
  const PseudoInverse pinv = truncated_pinv(e, rel_cutoff);
  const std::size_t d = A.dim();
  double tr = 0.0;
  for (std::size_t k = 0; k < pinv.rank; ++k) {
    double vcv = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < d; ++j) row += C(i, j) * e.eigenvectors(j, k);
      vcv += e.eigenvectors(i, k) * row;
    }
    tr += vcv / e.eigenvalues[k];
  }
  return {tr / static_cast<double>(N), pinv.rank};
}

}  // namespace

CriterionValue tic(const SymMatrix& H, const SymMatrix& C, std::size_t N, double rel_cutoff) {
  return truncated_trace(H, C, N, rel_cutoff);
}

CriterionValue tic_fisher(const SymMatrix& F, const SymMatrix& C, std::size_t N,
                          double rel_cutoff) {
  return truncated_trace(F, C, N, rel_cutoff);
}

double trace_ratio_raw(const SymMatrix& C, const SymMatrix& F) {
  if (C.dim() != F.dim()) throw DimensionError("trace_ratio: matrix dimensions differ");
  const double tf = trace(F);
  if (tf == 0.0) throw InvalidArgumentError("trace_ratio: Tr(F) is zero");
  return trace(C) / tf;
}

double trace_ratio_criterion(const SymMatrix& C, const SymMatrix& F, std::size_t N) {
  if (N == 0) throw InvalidArgumentError("trace_ratio: N must be >= 1");
  return static_cast<double>(C.dim()) * trace_ratio_raw(C, F) / static_cast<double>(N);
}

double aic(std::size_t d, std::size_t N) {
  if (N == 0) throw InvalidArgumentError("aic: N must be >= 1");
  return static_cast<double>(d) / static_cast<double>(N);
}

double flatness(const SymMatrix& H) { return trace(H); }

double sensitivity(const LossOracle& oracle, const Dataset& data) {
  data.validate(oracle.num_classes());
  double acc = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const PerSampleDerivatives e =
        eval(oracle, data.inputs[n], data.targets[n], Derivatives::kFirstOrder);
    acc += norm_sq(e.input_grad);
  }
  return acc / static_cast<double>(data.size());
}

Vector average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  Vector ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && xs[order[j]] == xs[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvalidArgumentError("spearman: lengths differ");
  if (xs.size() < 3) throw InvalidArgumentError("spearman: need at least 3 pairs");
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
      throw InvalidArgumentError("spearman: non-finite value");
  const Vector rx = average_ranks(xs);
  const Vector ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw InvalidArgumentError("spearman: correlation undefined for a constant sequence");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

const char* to_string(EvalSet e) { return e == EvalSet::kHeldOut ? "held-out" : "train"; }

EvalSet eval_set_from_string(const std::string& name) {
  if (name == "held-out" || name == "test") return EvalSet::kHeldOut;
  if (name == "train") return EvalSet::kTrain;
  throw InvalidArgumentError("unknown evaluation set '" + name + "'");
}

const char* to_string(GapConfig::Sweep s) {
  return s == GapConfig::Sweep::kCorruption ? "corruption" : "hidden";
}

GapConfig::Sweep gap_sweep_from_string(const std::string& name) {
  if (name == "corruption") return GapConfig::Sweep::kCorruption;
  if (name == "hidden") return GapConfig::Sweep::kHidden;
  throw InvalidArgumentError("unknown gap sweep '" + name + "'");
}

GapReport evaluate_criteria(const LossOracle& model, const Dataset& train_data,
                            const Dataset& test_data, const Dataset& eval_data,
                            double rel_cutoff) {
  GapReport r;
  r.train_loss = mean_loss(model, train_data);
  r.test_loss = mean_loss(model, test_data);
  r.gap = r.test_loss - r.train_loss;
  r.N = train_data.size();
  r.dim = model.dim();
  r.rel_cutoff = rel_cutoff;

  const InfoMatrixSet info = compute_all(model, eval_data);
  const CriterionValue t = tic(info.H, info.C, r.N, rel_cutoff);
  const CriterionValue tf = tic_fisher(info.F, info.C, r.N, rel_cutoff);
  r.tic = t.value;
  r.retained_rank = t.retained_rank;
  r.tic_fisher = tf.value;
  r.fisher_retained_rank = tf.retained_rank;
  r.trace_ratio = trace_ratio_criterion(info.C, info.F, r.N);
  r.trace_ratio_raw = trace_ratio_raw(info.C, info.F);
  r.aic = aic(r.dim, r.N);
  r.flatness = flatness(info.H);
  r.sensitivity = sensitivity(model, eval_data);
  return r;
}

std::vector<GapReport> gap_experiment(const GapConfig& config) {
  const bool corruption_sweep = config.sweep == GapConfig::Sweep::kCorruption;
  const std::size_t values =
      corruption_sweep ? config.corruption_levels.size() : config.hidden_sizes.size();
  if (values == 0) throw InvalidArgumentError("gap_experiment: empty sweep");
  if (config.seeds == 0) throw InvalidArgumentError("gap_experiment: seeds must be >= 1");
  if (config.n_train == 0 || (!config.test_equals_train && config.n_test == 0))
    throw InvalidArgumentError("gap_experiment: sample counts must be >= 1");

  std::vector<GapReport> reports(values * config.seeds);
  detail::parallel_for(reports.size(), [&](std::size_t k) {
    const std::size_t v = k / config.seeds;
    const std::size_t seed_index = k % config.seeds;
    const double corruption = corruption_sweep ? config.corruption_levels[v] : config.corruption;
    const int hidden = corruption_sweep ? config.hidden : config.hidden_sizes[v];
    if (!(corruption >= 0.0 && corruption <= 1.0))
      throw InvalidArgumentError("gap_experiment: corruption must lie in [0, 1]");
    if (hidden < 0) throw InvalidArgumentError("gap_experiment: hidden width must be >= 0");

    const std::uint64_t means_seed = derive_seed(config.root_seed, 2 * seed_index);
    Rng rng = make_rng(derive_seed(derive_seed(config.root_seed, 2 * seed_index + 1), v));

    MixtureSpec spec;
    spec.d_in = config.d_in;
    spec.classes = config.classes;
    spec.separation = config.separation;
    spec.corruption = corruption;
    spec.n = config.n_train;
    const Dataset train_data = make_gaussian_mixture(spec, means_seed, rng);
    spec.n = config.n_test;
    const Dataset test_data =
        config.test_equals_train ? train_data : make_gaussian_mixture(spec, means_seed, rng);

    const LossOracle init = randomized(
        hidden == 0 ? LossOracle::softmax_linear(config.d_in, config.classes)
                    : LossOracle::softmax_mlp(config.d_in, hidden, config.classes),
        config.init_scale, rng);

    GapReport& r = reports[k];
    try {
      const LossOracle model = train(init, train_data, config.train, rng);
      const Dataset& eval_data = config.eval_set == EvalSet::kHeldOut ? test_data : train_data;
      r = evaluate_criteria(model, train_data, test_data, eval_data, config.rel_cutoff);
    } catch (const DivergenceError& e) {
      r = GapReport{};
      r.status = "diverged";
      r.error = e.what();
      r.N = config.n_train;
      r.rel_cutoff = config.rel_cutoff;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      r.train_loss = r.test_loss = r.gap = r.tic = r.tic_fisher = nan;
      r.trace_ratio = r.trace_ratio_raw = r.aic = r.flatness = r.sensitivity = nan;
    }
    r.corruption = corruption;
    r.hidden = hidden;
    r.seed_index = seed_index;
  });
  return reports;
}

GapSummary summarize_gap(const std::vector<GapReport>& reports, GapConfig::Sweep sweep) {
  GapSummary s;
  Vector gap, tic_v, tf, tr, fl, se, sw;
  for (const GapReport& r : reports) {
    if (r.status != "ok") continue;
    gap.push_back(r.gap);
    tic_v.push_back(r.tic);
    tf.push_back(r.tic_fisher);
    tr.push_back(r.trace_ratio);
    fl.push_back(r.flatness);
    se.push_back(r.sensitivity);
    sw.push_back(sweep == GapConfig::Sweep::kCorruption ? r.corruption
                                                         : static_cast<double>(r.hidden));
  }
  s.used = gap.size();
  auto rho = [&](const Vector& xs) {
    try {
      return spearman(xs, gap);
    } catch (const InvalidArgumentError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  s.rho_tic = rho(tic_v);
  s.rho_tic_fisher = rho(tf);
  s.rho_trace_ratio = rho(tr);
  s.rho_flatness = rho(fl);
  s.rho_sensitivity = rho(se);
  s.rho_gap_sweep = rho(sw);
  return s;
}

}  // namespace infolab
