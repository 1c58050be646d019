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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "infolab/criteria.hpp"
#include "infolab/error.hpp"
#include "infolab/infomat.hpp"
#include "test_support.hpp"

using namespace infolab;

namespace {

// ranks by counting, ties averaged
Vector brute_ranks(const Vector& v) {
  Vector r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0, equal = 0.0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

double brute_spearman(const Vector& x, const Vector& y) {
  const Vector rx = brute_ranks(x), ry = brute_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

Matrix random_orthogonal(std::size_t d, Rng& rng) {
  return eigh(testing::random_symmetric(d, rng)).eigenvectors;
}

}  // namespace

TEST_CASE("TIC equals AIC when C = H") {
  Rng rng = make_rng(1);
  SymMatrix H = testing::random_psd(6, 6, rng);
  H += SymMatrix::identity(6);
  const CriterionValue v = tic(H, H, 50);
  CHECK(v.value == doctest::Approx(aic(6, 50)).epsilon(1e-12));
  CHECK(v.retained_rank == 6);
  CHECK(tic(H, 2.0 * H, 50).value == doctest::Approx(12.0 / 50).epsilon(1e-12));
}

TEST_CASE("TIC for the Gaussian mean model") {
  Rng rng = make_rng(2);
  Dataset data;
  for (int i = 0; i < 40; ++i) {
    data.inputs.push_back(standard_normal_vector(rng, 3));
    data.targets.push_back(Target::none());
  }
  Vector mean(3, 0.0);
  for (const Vector& x : data.inputs)
    for (std::size_t i = 0; i < 3; ++i) mean[i] += x[i] / 40.0;
  const InfoMatrixSet info = compute_all(LossOracle::gaussian_mean(3).with_params(mean), data);
  double direct = 0.0;
  for (const Vector& x : data.inputs)
    for (std::size_t i = 0; i < 3; ++i) direct += (x[i] - mean[i]) * (x[i] - mean[i]) / 40.0;
  CHECK(tic(info.H, info.C, 40).value == doctest::Approx(direct / 40.0).epsilon(1e-12));
}

TEST_CASE("Fisher-based TIC") {
  Rng rng = make_rng(3);
  const SymMatrix H = testing::random_psd(5, 5, rng) + SymMatrix::identity(5);
  const SymMatrix C = testing::random_psd(5, 3, rng);
  CHECK(tic_fisher(H, C, 10).value == tic(H, C, 10).value);

  // C = a F on a rank-deficient F: k a / N with k the retained rank
  const SymMatrix F = testing::random_psd(6, 4, rng);
  const CriterionValue v = tic_fisher(F, 1.7 * F, 20);
  CHECK(v.retained_rank == 4);
  CHECK(v.value == doctest::Approx(4 * 1.7 / 20).epsilon(1e-9));

  // eigenbasis loop oracle
  const SymMatrix A = testing::random_psd(5, 5, rng) + 0.1 * SymMatrix::identity(5);
  const EigenDecomp e = eigh(A);
  double loop = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    Vector vk(5);
    for (std::size_t i = 0; i < 5; ++i) vk[i] = e.eigenvectors(i, k);
    if (e.eigenvalues[k] > 1e-3 * e.eigenvalues.front()) loop += quadform(C, vk) / e.eigenvalues[k];
  }
  CHECK(tic_fisher(A, C, 7).value == doctest::Approx(loop / 7).epsilon(1e-10));
}

TEST_CASE("TIC is invariant under a change of basis") {
  Rng rng = make_rng(4);
  const SymMatrix H = testing::random_psd(5, 5, rng) + SymMatrix::identity(5);
  const SymMatrix C = testing::random_psd(5, 5, rng);
  const Matrix Q = random_orthogonal(5, rng);
  CHECK(tic(congruence(Q, H), congruence(Q, C), 9).value ==
        doctest::Approx(tic(H, C, 9).value).epsilon(1e-10));
}

TEST_CASE("trace ratio, AIC and flatness") {
  Rng rng = make_rng(5);
  const SymMatrix F = testing::random_psd(4, 4, rng);
  CHECK(trace_ratio_criterion(F, F, 8) == doctest::Approx(0.5));
  CHECK(trace_ratio_criterion(3.0 * F, F, 8) == doctest::Approx(1.5));
  CHECK(trace_ratio_raw(3.0 * F, F) == doctest::Approx(3.0));
  CHECK_THROWS_AS(trace_ratio_criterion(F, SymMatrix(4), 8), InvalidArgumentError);
  CHECK(aic(10, 100) == doctest::Approx(0.1));
  CHECK(aic(0, 5) == 0.0);
  CHECK(flatness(SymMatrix::identity(7)) == 7.0);
  CHECK(flatness(SymMatrix::diagonal({1.0, 2.0, 3.0})) == 6.0);
  double loop = 0.0;
  for (std::size_t i = 0; i < 4; ++i) loop += F(i, i);
  CHECK(flatness(F) == doctest::Approx(loop));
}

TEST_CASE("spearman") {
  CHECK(spearman(Vector{1, 2, 3}, Vector{10, 20, 30}) == doctest::Approx(1.0));
  CHECK(spearman(Vector{1, 2, 3}, Vector{3, 2, 1}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(spearman(Vector{1, 1, 1}, Vector{1, 2, 3}), InvalidArgumentError);
  CHECK_THROWS_AS(spearman(Vector{1, 2}, Vector{1, 2}), InvalidArgumentError);
  CHECK_THROWS_AS(spearman(Vector{1, 2, 3}, Vector{1, 2}), InvalidArgumentError);
  const Vector ranks = average_ranks(Vector{5.0, 1.0, 5.0, 3.0});
  CHECK(ranks == Vector{3.5, 1.0, 3.5, 2.0});

  Rng rng = make_rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(15), y(15);
    for (std::size_t i = 0; i < 15; ++i) {
      x[i] = std::round(3.0 * standard_normal(rng));
      y[i] = standard_normal(rng) + 0.3 * x[i];
    }
    CHECK(spearman(x, y) == doctest::Approx(brute_spearman(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("sensitivity") {
  Rng rng = make_rng(7);
  Dataset cls;
  for (int i = 0; i < 20; ++i) {
    cls.inputs.push_back(standard_normal_vector(rng, 3));
    cls.targets.push_back(Target::cls(i % 3));
  }
  // only the biases are nonzero
  LossOracle flat = LossOracle::softmax_linear(3, 3);
  flat.set_params({0, 0, 0, 0, 0, 0, 0, 0, 0, 0.5, -1.0, 2.0});
  CHECK(sensitivity(flat, cls) == 0.0);

  Dataset pts;
  for (int i = 0; i < 10; ++i) {
    pts.inputs.push_back(standard_normal_vector(rng, 2));
    pts.targets.push_back(Target::none());
  }
  const LossOracle gm = LossOracle::gaussian_mean(2).with_params({0.3, -0.2});
  double direct = 0.0;
  for (const Vector& x : pts.inputs) direct += ((x[0] - 0.3) * (x[0] - 0.3) + (x[1] + 0.2) * (x[1] + 0.2)) / 10.0;
  CHECK(sensitivity(gm, pts) == doctest::Approx(direct).epsilon(1e-12));

  const LossOracle soft = randomized(LossOracle::softmax_linear(3, 3), 1.0, rng);
  double fd = 0.0;
  for (std::size_t n = 0; n < cls.size(); ++n) {
    for (std::size_t j = 0; j < 3; ++j) {
      Vector up = cls.inputs[n], down = cls.inputs[n];
      up[j] += 1e-6;
      down[j] -= 1e-6;
      const double g = (loss(soft, up, cls.targets[n]) - loss(soft, down, cls.targets[n])) / 2e-6;
      fd += g * g / static_cast<double>(cls.size());
    }
  }
  CHECK(std::abs(sensitivity(soft, cls) - fd) <= 1e-5 * fd);
}

TEST_CASE("gap is zero when the test set is the training set") {
  GapConfig cfg;
  cfg.corruption_levels = {0.0};
  cfg.seeds = 1;
  cfg.n_train = 12;
  cfg.d_in = 3;
  cfg.hidden = 8;
  cfg.train = TrainOptions{200, 0.5, 12, 0.0};
  cfg.test_equals_train = true;
  const std::vector<GapReport> reports = gap_experiment(cfg);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].status == "ok");
  CHECK(std::abs(reports[0].gap) < 1e-9);
  CHECK(reports[0].N == 12);
  CHECK(reports[0].aic == doctest::Approx(static_cast<double>(reports[0].dim) / 12));
}

TEST_CASE("gap experiment is deterministic and ordered") {
  GapConfig cfg;
  cfg.corruption_levels = {0.0, 0.5};
  cfg.seeds = 2;
  cfg.n_train = 20;
  cfg.n_test = 100;
  cfg.d_in = 4;
  cfg.train = TrainOptions{100, 0.5, 20, 0.0};
  const std::vector<GapReport> a = gap_experiment(cfg);
  const std::vector<GapReport> b = gap_experiment(cfg);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].gap == b[i].gap);
    CHECK(a[i].tic == b[i].tic);
    CHECK(a[i].corruption == cfg.corruption_levels[i / 2]);
    CHECK(a[i].seed_index == i % 2);
    CHECK(a[i].sensitivity >= 0.0);
    // softmax-linear: the Hessian is the Fisher
    CHECK(a[i].tic_fisher == doctest::Approx(a[i].tic).epsilon(1e-9));
  }
  const GapSummary s = summarize_gap(a, GapConfig::Sweep::kCorruption);
  CHECK(s.used == 4);
}
