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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "infolab/bounds.hpp"
#include "infolab/error.hpp"
#include "test_support.hpp"

using namespace infolab;

namespace {

Vector random_simplex(std::size_t n, Rng& rng) {
  Vector p(n);
  double total = 0.0;
  for (double& v : p) {
    v = -std::log(1.0 - uniform01(rng));
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

}  // namespace

TEST_CASE("chi-square divergence") {
  DiscreteJoint base;
  base.support = {{{0.0}, Target::none()}, {{1.0}, Target::none()}};
  base.probs = {0.5, 0.5};
  CHECK(chi_square(base, base) == 0.0);
  const DiscreteJoint point = with_probs(base, {1.0, 0.0});
  CHECK(chi_square(point, base) == doctest::Approx(1.0));
  CHECK_THROWS_AS(chi_square(base, point), InvalidArgumentError);

  Rng rng = make_rng(1);
  DiscreteJoint big;
  for (int i = 0; i < 20; ++i) big.support.push_back({{static_cast<double>(i)}, Target::none()});
  big.probs = random_simplex(20, rng);
  const DiscreteJoint other = with_probs(big, random_simplex(20, rng));
  double loop = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    const double d = big.probs[i] - other.probs[i];
    loop += d * d / other.probs[i];
  }
  CHECK(chi_square(big, other) == loop);
}

TEST_CASE("beta moments") {
  DiscreteJoint dist;
  dist.support = {{{1.0, 2.0, 3.0}, Target::none()}, {{0.0, 0.0, 0.0}, Target::none()}};
  dist.probs = {0.3, 0.7};
  const LossOracle gm = LossOracle::gaussian_mean(3);
  CHECK(beta_moments(gm, dist).beta1 == doctest::Approx(3.0));
  // gradients are theta - x; norms^4 are 14^2 and 0
  CHECK(beta_moments(gm, dist).beta2 == doctest::Approx(0.3 * 196.0));
  const LossOracle at_origin = gm.with_params({0.0, 0.0, 0.0});
  DiscreteJoint zero_grad = dist;
  zero_grad.probs = {0.0, 1.0};
  CHECK(beta_moments(at_origin, zero_grad).beta2 == 0.0);

  Rng rng = make_rng(2);
  const LossOracle o = randomized(LossOracle::softmax_linear(2, 3), 1.0, rng);
  const std::vector<Vector> xs = {standard_normal_vector(rng, 2), standard_normal_vector(rng, 2)};
  const DiscreteJoint q = model_joint(o, xs, Vector{0.4, 0.6});
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const PerSampleDerivatives e = eval(o, q.support[i].x, q.support[i].y);
    double hh = 0.0;
    for (std::size_t r = 0; r < o.dim(); ++r)
      for (std::size_t c = 0; c < o.dim(); ++c) hh += e.hess(r, c) * e.hess(r, c);
    double gg = 0.0;
    for (double g : e.grad) gg += g * g;
    b1 += q.probs[i] * hh;
    b2 += q.probs[i] * gg * gg;
  }
  const BetaMoments m = beta_moments(o, q);
  CHECK(m.beta1 == doctest::Approx(b1).epsilon(1e-12));
  CHECK(m.beta2 == doctest::Approx(b2).epsilon(1e-12));
}

TEST_CASE("identical distributions give zero everywhere") {
  Rng rng = make_rng(3);
  const LossOracle o = randomized(LossOracle::softmax_linear(2, 3), 1.0, rng);
  const std::vector<Vector> xs = {standard_normal_vector(rng, 2), standard_normal_vector(rng, 2),
                                  standard_normal_vector(rng, 2)};
  const DiscreteJoint q = model_joint(o, xs, Vector{0.2, 0.3, 0.5});
  for (BoundDirection dir : {BoundDirection::kBackward, BoundDirection::kForward}) {
    const BoundReport r = verify_bounds(o, q, q, dir);
    CHECK(r.chi2_forward == 0.0);
    CHECK(r.chi2_backward == 0.0);
    CHECK(r.rhs_FH == 0.0);
    CHECK(r.rhs_FC == 0.0);
    CHECK(r.rhs_CH == 0.0);
    CHECK(r.lhs_FH < 1e-28);
    CHECK(r.lhs_FC < 1e-28);
    CHECK(r.lhs_CH < 1e-28);
    CHECK(r.fisher_identity_gap < 1e-28);
  }
}

TEST_CASE("GaussianMean two-point support") {
  DiscreteJoint p;
  p.support = {{{-1.0}, Target::none()}, {{2.0}, Target::none()}};
  p.probs = {0.8, 0.2};
  const DiscreteJoint q = with_probs(p, {0.3, 0.7});
  const LossOracle o = LossOracle::gaussian_mean(1).with_params({0.5});
  for (BoundDirection dir : {BoundDirection::kBackward, BoundDirection::kForward}) {
    const BoundReport r = verify_bounds(o, p, q, dir);
    CHECK(r.slack_FH >= 0.0);
    CHECK(r.lhs_FH == 0.0);
    // C under p by hand: E_p[(theta - x)^2]
    CHECK(r.C(0, 0) == doctest::Approx(0.8 * 2.25 + 0.2 * 2.25));
  }
}

TEST_CASE("random softmax trials never violate the bounds") {
  Rng rng = make_rng(4);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const LossOracle o = randomized(LossOracle::softmax_linear(2, 3), 1.0, rng);
    std::vector<Vector> xs;
    for (int i = 0; i < 4; ++i) xs.push_back(standard_normal_vector(rng, 2));
    const DiscreteJoint q = model_joint(o, xs, random_simplex(4, rng));
    const DiscreteJoint p = with_probs(q, random_simplex(q.size(), rng));
    for (BoundDirection dir : {BoundDirection::kBackward, BoundDirection::kForward}) {
      const BoundReport r = verify_bounds(o, p, q, dir);
      violations += r.min_slack() < -1e-9;
      // left-hand sides by direct enumeration
      SymMatrix hp(o.dim()), cp(o.dim()), fq(o.dim());
      for (std::size_t i = 0; i < p.size(); ++i) {
        const PerSampleDerivatives e = eval(o, p.support[i].x, p.support[i].y);
        SymMatrix h = e.hess;
        h *= p.probs[i];
        hp += h;
        add_outer(cp, e.grad, p.probs[i]);
        add_outer(fq, e.grad, q.probs[i]);
      }
      CHECK(r.lhs_CH == doctest::Approx(frobenius_dist_sq(cp, hp)).epsilon(1e-9));
      CHECK(r.lhs_FC == doctest::Approx(frobenius_dist_sq(fq, cp)).epsilon(1e-9));
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("support mismatch and zero masses") {
  DiscreteJoint a;
  a.support = {{{0.0}, Target::none()}, {{1.0}, Target::none()}};
  a.probs = {0.5, 0.5};
  DiscreteJoint b;
  b.support = {{{0.0}, Target::none()}, {{2.0}, Target::none()}};
  b.probs = {0.5, 0.5};
  CHECK_THROWS(chi_square(a, b));
  CHECK_THROWS_AS(with_probs(a, {0.7, 0.7}), InvalidArgumentError);
  const DiscreteJoint zero = with_probs(a, {1.0, 0.0});
  const BoundReport r = verify_bounds(LossOracle::gaussian_mean(1), zero, a, BoundDirection::kBackward);
  CHECK(r.chi2_forward == std::numeric_limits<double>::infinity());
  CHECK(std::isfinite(r.chi2_backward));
}
