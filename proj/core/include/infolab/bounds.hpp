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

#ifndef INFOLAB_BOUNDS_HPP
#define INFOLAB_BOUNDS_HPP

#include <vector>

#include "infolab/matrix.hpp"
#include "infolab/models.hpp"

namespace infolab {

struct SupportPoint {
  Vector x;
  Target y;
};

/// A probability distribution over finitely many (x, y) points.
struct DiscreteJoint {
  std::vector<SupportPoint> support;
  Vector probs;

  std::size_t size() const noexcept { return support.size(); }
  /// Lengths agree, probs >= 0, sum within 1e-12 of 1.
  void validate() const;
};

/// The model joint m(x) q_theta(y | x) over every (x_i, y) pair, classes in
/// ascending order within each x_i. Requires a softmax model.
DiscreteJoint model_joint(const LossOracle& oracle, const std::vector<Vector>& xs,
                          std::span<const double> x_marginal);

/// Same support as `like`, probabilities replaced.
DiscreteJoint with_probs(const DiscreteJoint& like, Vector probs);

/// sum_i (p_i - q_i)^2 / q_i. The supports must be identical and q strictly
/// positive on it; a zero mass in q throws InvalidArgumentError.
double chi_square(const DiscreteJoint& p, const DiscreteJoint& q);

struct BetaMoments {
  double beta1 = 0.0;  ///< E[||Hessian||_F^2]
  double beta2 = 0.0;  ///< E[||g g^T||_F^2] = E[||g||^4]
};

BetaMoments beta_moments(const LossOracle& oracle, const DiscreteJoint& dist);

enum class BoundDirection {
  kBackward,  ///< moments under q, weighted by D(p || q)
  kForward,   ///< moments under p, weighted by D(q || p)
};

const char* to_string(BoundDirection d);

/// Both sides of the three Frobenius-distance bounds between the curvature
/// and noise matrices, evaluated exactly over a finite support.
///
/// H and C are expectations under p; F is an expectation under q. The F-H
/// bound uses F = E_q[Hessian] and the F-C bound uses F = E_q[g g^T]; when q
/// is a model joint (see `model_joint`) both are the same matrix and
/// `fisher_identity_gap` is zero up to rounding. The C-H bound with
/// (beta1 + beta2) relies on that identity and on convex per-sample losses.
struct BoundReport {
  BoundDirection direction = BoundDirection::kBackward;
  double lhs_FH = 0.0;
  double lhs_FC = 0.0;
  double lhs_CH = 0.0;
  double chi2_forward = 0.0;   ///< D(q || p); +inf where p has a zero mass
  double chi2_backward = 0.0;  ///< D(p || q); +inf where q has a zero mass
  double beta1 = 0.0;
  double beta2 = 0.0;
  double rhs_FH = 0.0;
  double rhs_FC = 0.0;
  double rhs_CH = 0.0;
  double slack_FH = 0.0;
  double slack_FC = 0.0;
  double slack_CH = 0.0;
  double fisher_identity_gap = 0.0;  ///< ||E_q[g g^T] - E_q[Hessian]||_F^2
  SymMatrix H;
  SymMatrix F;
  SymMatrix C;

  double min_slack() const;
};

BoundReport verify_bounds(const LossOracle& oracle, const DiscreteJoint& p, const DiscreteJoint& q,
                          BoundDirection direction);

}  // namespace infolab

#endif  // INFOLAB_BOUNDS_HPP
