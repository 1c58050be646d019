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

#include "infolab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "infolab/error.hpp"

namespace infolab {

namespace {

bool same_point(const SupportPoint& a, const SupportPoint& b) {
  return a.x == b.x && a.y.label == b.y.label && a.y.value == b.y.value;
}

void require_same_support(const DiscreteJoint& p, const DiscreteJoint& q) {
  p.validate();
  q.validate();
  if (p.size() != q.size()) throw DimensionError("distributions have different support sizes");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!same_point(p.support[i], q.support[i])) {
      throw InvalidArgumentError("distributions differ at support point " + std::to_string(i));
    }
  }
}

// sum (a - b)^2 / b, +inf if b vanishes where a does not.
double divergence_or_inf(const Vector& a, const Vector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b[i] <= 0.0) {
      if (a[i] != b[i]) return std::numeric_limits<double>::infinity();
      continue;
    }
    const double d = a[i] - b[i];
    acc += d * d / b[i];
  }
  return acc;
}

struct Expectations {
  SymMatrix hess;
  SymMatrix outer;
  BetaMoments moments;
};

Expectations expectations(const LossOracle& oracle, const DiscreteJoint& dist) {
  const std::size_t d = oracle.dim();
  Expectations e{SymMatrix(d), SymMatrix(d), {}};
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double w = dist.probs[i];
    if (w == 0.0) continue;
    const auto ev = eval(oracle, dist.support[i].x, dist.support[i].y, Derivatives::kAll);
    SymMatrix h = ev.hess;
    h *= w;
    e.hess += h;
    add_outer(e.outer, ev.grad, w);
    const double g2 = norm_sq(ev.grad);
    e.moments.beta1 += w * frobenius_inner(ev.hess, ev.hess);
    e.moments.beta2 += w * g2 * g2;
  }
  return e;
}

}  // namespace

void DiscreteJoint::validate() const {
  if (support.empty()) throw InvalidArgumentError("distribution has empty support");
  if (probs.size() != support.size()) {
    throw DimensionError("distribution has " + std::to_string(probs.size()) +
                         " probabilities for " + std::to_string(support.size()) + " points");
  }
  double total = 0.0;
  for (double v : probs) {
    if (!(v >= 0.0)) throw InvalidArgumentError("distribution has a negative probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidArgumentError("distribution sums to " + std::to_string(total));
  }
}

DiscreteJoint model_joint(const LossOracle& oracle, const std::vector<Vector>& xs,
                          std::span<const double> x_marginal) {
  if (xs.size() != x_marginal.size()) throw DimensionError("model_joint: marginal length");
  DiscreteJoint q;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Vector cond = label_distribution(oracle, xs[i]);
    for (std::size_t y = 0; y < cond.size(); ++y) {
      q.support.push_back({xs[i], Target::cls(static_cast<int>(y))});
      q.probs.push_back(x_marginal[i] * cond[y]);
    }
  }
  return q;
}

DiscreteJoint with_probs(const DiscreteJoint& like, Vector probs) {
  DiscreteJoint out{like.support, std::move(probs)};
  out.validate();
  return out;
}

double chi_square(const DiscreteJoint& p, const DiscreteJoint& q) {
  require_same_support(p, q);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(q.probs[i] > 0.0)) {
      throw InvalidArgumentError("chi_square: q has zero mass at support point " +
                                 std::to_string(i) + " (p is not absolutely continuous)");
    }
    const double d = p.probs[i] - q.probs[i];
    acc += d * d / q.probs[i];
  }
  return acc;
}

BetaMoments beta_moments(const LossOracle& oracle, const DiscreteJoint& dist) {
  dist.validate();
  return expectations(oracle, dist).moments;
}

const char* to_string(BoundDirection d) {
  return d == BoundDirection::kBackward ? "backward" : "forward";
}

double BoundReport::min_slack() const { return std::min({slack_FH, slack_FC, slack_CH}); }

BoundReport verify_bounds(const LossOracle& oracle, const DiscreteJoint& p, const DiscreteJoint& q,
                          BoundDirection direction) {
  require_same_support(p, q);
  BoundReport r;
  r.direction = direction;
  r.chi2_backward = divergence_or_inf(p.probs, q.probs);
  r.chi2_forward = divergence_or_inf(q.probs, p.probs);

  double chi2 = 0.0;
  if (direction == BoundDirection::kBackward) {
    chi2 = chi_square(p, q);
  } else {
    chi2 = chi_square(q, p);
  }

  const Expectations under_p = expectations(oracle, p);
  const Expectations under_q = expectations(oracle, q);
  const BetaMoments& m =
      direction == BoundDirection::kBackward ? under_q.moments : under_p.moments;
  r.beta1 = m.beta1;
  r.beta2 = m.beta2;

  r.H = under_p.hess;
  r.C = under_p.outer;
  r.F = under_q.outer;
  r.fisher_identity_gap = frobenius_dist_sq(under_q.outer, under_q.hess);

  r.lhs_FH = frobenius_dist_sq(under_q.hess, r.H);
  r.lhs_FC = frobenius_dist_sq(under_q.outer, r.C);
  r.lhs_CH = frobenius_dist_sq(r.C, r.H);
  r.rhs_FH = r.beta1 * chi2;
  r.rhs_FC = r.beta2 * chi2;
  r.rhs_CH = (r.beta1 + r.beta2) * chi2;
  r.slack_FH = r.rhs_FH - r.lhs_FH;
  r.slack_FC = r.rhs_FC - r.lhs_FC;
  r.slack_CH = r.rhs_CH - r.lhs_CH;
  return r;
}

}  // namespace infolab
