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

#ifndef INFOLAB_QUADSIM_HPP
#define INFOLAB_QUADSIM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "infolab/matrix.hpp"

namespace infolab {

/// f(theta) = 1/2 (theta - theta*)^T H (theta - theta*), observed through
/// gradients H (theta - theta*) + eps with E[eps] = 0, E[eps eps^T] = S.
struct QuadraticProblem {
  SymMatrix H;
  Vector theta_star;
  SymMatrix S;

  std::size_t dim() const noexcept { return H.dim(); }
  /// lambda_min(H) > 0, lambda_min(S) >= -1e-12, matching dimensions.
  void validate() const;
  double objective(std::span<const double> theta) const;
  /// H, S (and M, when given) all diagonal.
  bool is_diagonal() const;
};

enum class Theta0Mode {
  kUnitSuboptUniform,  ///< theta0_i = c, with c chosen so f(theta0) = target_subopt
  kOnes,               ///< theta0_i = 1
  kExplicit,           ///< caller-supplied vector
};

const char* to_string(Theta0Mode mode);
Theta0Mode theta0_mode_from_string(const std::string& name);

struct Theta0Spec {
  Theta0Mode mode = Theta0Mode::kOnes;
  double target_subopt = 10.0;
  Vector explicit_theta;
};

/// S = alpha_beta H^beta with alpha_beta chosen so Tr(S) = trace_target.
struct NoiseGeometry {
  int beta = 0;
  double trace_target = 0.0;
};

struct ProblemInstance {
  QuadraticProblem problem;
  Vector theta0;
  double noise_scale = 0.0;  ///< alpha_beta
  Theta0Spec theta0_spec;
};

/// Diagonal benchmark problem: H_ii = i^2 (i = 1..d), theta* = 0,
/// S = noise_multiplier * alpha_beta H^beta with Tr(alpha_beta H^beta) = d.
ProblemInstance make_problem(int d, int beta, const Theta0Spec& theta0 = {},
                             double noise_multiplier = 1.0);

/// Same construction for any positive definite diagonal `h`.
SymMatrix noise_covariance(const SymMatrix& H, const NoiseGeometry& geometry);

enum class MethodKind { kSG, kPreconditioned, kPolyak };

const char* to_string(MethodKind kind);

/// SG:             theta <- theta - alpha g
/// Preconditioned: theta <- theta - alpha M g   (M symmetric positive definite)
/// Polyak:         theta <- theta - alpha v_prev, v <- gamma v_prev + g(theta)
///                 i.e. [theta; v] evolves by P = [[I, -alpha I], [H, gamma I - alpha H]]
///                 with the gradient noise entering v, and v_0 = 0.
struct MethodSpec {
  MethodKind kind = MethodKind::kSG;
  double alpha = 0.0;
  SymMatrix M;  ///< empty means identity
  double gamma = 0.0;

  static MethodSpec sg(double alpha);
  static MethodSpec preconditioned(double alpha, SymMatrix M);
  /// Preconditioned SG with M = H^-1.
  static MethodSpec newton(const QuadraticProblem& p, double alpha);
  static MethodSpec polyak(double alpha, double gamma);

  SymMatrix preconditioner(std::size_t dim) const;
  void validate(std::size_t dim) const;
};

/// Exact first and second moments of the iterate about theta*. Polyak
/// additionally carries the velocity blocks of the joint [theta; v] moment.
struct MomentState {
  std::int64_t t = 0;
  Vector delta;         ///< E[theta_t - theta*]
  SymMatrix Sigma;      ///< E[(theta_t - theta*)(theta_t - theta*)^T]
  Vector delta_v;       ///< E[v_t]
  SymMatrix Sigma_vv;   ///< E[v_t v_t^T]
  Matrix Sigma_thetav;  ///< E[(theta_t - theta*) v_t^T]

  bool has_velocity() const noexcept { return !delta_v.empty(); }
};

MomentState initial_state(const QuadraticProblem& p, const MethodSpec& m,
                          std::span<const double> theta0);

/// One exact step of the moment recursion:
///   delta' = (I - alpha M H) delta
///   Sigma' = (I - alpha M H) Sigma (I - alpha M H)^T + alpha^2 M S M
/// or the joint [theta; v] recursion for Polyak.
MomentState step_moments(const QuadraticProblem& p, const MethodSpec& m, const MomentState& s);

/// 1/2 Tr(H Sigma).
double expected_subopt(const QuadraticProblem& p, const MomentState& s);

/// Iterates `step_moments` from a zero state until the largest entry change
/// of Sigma falls below rel_tol times its largest entry. Diagonal problems
/// only track the diagonal (off-diagonals stay zero from a zero start).
MomentState stationary_by_iteration(const QuadraticProblem& p, const MethodSpec& m,
                                    double rel_tol = 1e-15, std::int64_t max_steps = 50'000'000);

/// Stationary second moment of theta from the discrete Lyapunov equation
/// X = A X A^T + Q (Smith doubling), valid for any stable method.
SymMatrix stationary_covariance(const QuadraticProblem& p, const MethodSpec& m);

/// Residual of Sigma H M + M H Sigma - alpha M (S + H Sigma H) M, Frobenius.
double lyapunov_residual(const QuadraticProblem& p, const MethodSpec& m, const SymMatrix& sigma);

/// Spectral radius of the mean iteration (I - alpha M H, or P for Polyak).
double spectral_radius(const QuadraticProblem& p, const MethodSpec& m);

/// Closed-form stationary suboptimality of (preconditioned) SG:
///   alpha/2 Tr((2I - alpha M H)^-1 M S).
/// Requires H, S, M to commute (UnsupportedError otherwise) and
/// |1 - alpha lambda_i(MH)| < 1 (DivergenceError otherwise).
double limit_cycle_sg(const QuadraticProblem& p, double alpha, const SymMatrix& M);

/// Closed-form stationary suboptimality of Polyak momentum:
///   alpha/2 (1+gamma)/(1-gamma) Tr((2(1+gamma)I - alpha H)^-1 S).
double limit_cycle_polyak(const QuadraticProblem& p, double alpha, double gamma);

/// Closed form when the matrices commute, Lyapunov solve otherwise.
double stationary_subopt(const QuadraticProblem& p, const MethodSpec& m);

struct StepsOutcome {
  enum class Status { kReached, kNever, kDiverged };
  Status status = Status::kNever;
  std::int64_t steps = 0;
  double limit_value = 0.0;

  bool reached() const noexcept { return status == Status::kReached; }
  std::string to_string() const;
};

/// Smallest t with E[f(theta_t)] - f(theta*) <= eps under exact moment
/// propagation. Returns kDiverged if the mean iteration is unstable and
/// kNever if the stationary value exceeds eps (or max_steps is hit) without
/// iterating.
StepsOutcome steps_to_threshold(const QuadraticProblem& p, const MethodSpec& m,
                                std::span<const double> theta0, double eps,
                                std::int64_t max_steps = 10'000'000);

/// Expected suboptimality for t = 0..steps (exact).
Vector subopt_curve(const QuadraticProblem& p, const MethodSpec& m, std::span<const double> theta0,
                    std::int64_t steps);

enum class Optimizer { kSG, kNewton, kPolyak };

const char* to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& name);

MethodSpec make_method(const QuadraticProblem& p, Optimizer o, double alpha, double gamma = 0.0);

/// 10^(k/points_per_decade) for every k with the value inside [lo, hi].
std::vector<double> log_grid(double lo, double hi, int points_per_decade);
std::vector<double> default_alpha_grid();
std::vector<double> default_gamma_grid();

struct GridPoint {
  double alpha = 0.0;
  double gamma = 0.0;
  StepsOutcome outcome;
};

struct StepsizeSearch {
  double best_alpha = 0.0;
  double best_gamma = 0.0;
  std::int64_t best_steps = 0;
  std::vector<GridPoint> profile;
};

/// Exhaustive grid search for the fewest steps to reach eps. Ties go to the
/// larger alpha, then the larger gamma. gamma_grid is ignored except for
/// Polyak. Throws InfeasibleError if no grid point reaches eps.
StepsizeSearch optimize_stepsize(const QuadraticProblem& p, std::span<const double> theta0,
                                 Optimizer o, double eps, std::span<const double> alpha_grid,
                                 std::span<const double> gamma_grid);

struct SimulationResult {
  Vector mean;    ///< mean suboptimality per step, t = 0..steps
  Vector stderr_; ///< standard error of the mean
  std::size_t paths = 0;
};

/// Monte Carlo trajectories with eps ~ N(0, S); path k uses the stream
/// derive_seed(seed, k).
SimulationResult simulate_paths(const QuadraticProblem& p, const MethodSpec& m,
                                std::span<const double> theta0, std::int64_t steps,
                                std::size_t paths, std::uint64_t seed);

struct FunctionValueBoundCheck {
  double mu = 0.0;     ///< lambda_min(H)
  double mu_M = 0.0;   ///< lambda_min(M - alpha/2 M H M)
  double rate = 0.0;   ///< 1 - 2 alpha mu_M mu
  double floor = 0.0;  ///< alpha / (4 mu_M mu) Tr(H M S M)
  Vector exact;        ///< exact E[Delta_k], k = 0..horizon
  Vector bound;        ///< rate^k Delta_0 + floor
  std::int64_t violations = 0;
  double max_excess = 0.0;  ///< max_k (exact_k - bound_k)
  std::vector<std::int64_t> checkpoints;
  Vector mc_mean;
  Vector mc_stderr;
  std::int64_t mc_outliers = 0;  ///< checkpoints beyond 3 standard errors
};

/// Checks the function-value bound for preconditioned SG on the quadratic:
///   E[Delta_k] <= (1 - 2 alpha mu_M mu)^k Delta_0 + alpha/(4 mu_M mu) Tr(H M S M)
/// at every k <= horizon (violation: excess > 1e-12 (1 + bound)), and compares
/// `mc_paths` Monte Carlo trajectories with the exact curve at `checkpoints`
/// evenly spaced steps. Throws BoundInapplicableError unless mu_M > 0 and
/// alpha mu_M mu <= 1/2.
FunctionValueBoundCheck check_function_value_bound(const QuadraticProblem& p, const MethodSpec& m,
                             std::span<const double> theta0, std::int64_t horizon,
                             std::size_t mc_paths, std::uint64_t seed, int checkpoints = 10);

}  // namespace infolab

#endif  // INFOLAB_QUADSIM_HPP
