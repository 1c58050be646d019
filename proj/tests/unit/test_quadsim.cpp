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

#include "doctest.h"
#include "infolab/error.hpp"
#include "infolab/quadsim.hpp"
#include "test_support.hpp"

using namespace infolab;

namespace {

QuadraticProblem scalar_problem(double h, double s) {
  return {SymMatrix::diagonal({h}), Vector{0.0}, SymMatrix::diagonal({s})};
}

// 5e-3 to one significant digit
bool round_one_digit_ok(double a) { return a >= 4.5e-3 && a < 5.5e-3; }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("protocol problems") {
  const ProblemInstance p1 = make_problem(20, 1);
  double sum_sq = 0.0;
  for (int i = 1; i <= 20; ++i) sum_sq += static_cast<double>(i) * i;
  CHECK(sum_sq == 2870.0);
  CHECK(p1.noise_scale == doctest::Approx(20.0 / sum_sq).epsilon(1e-14));
  CHECK(trace(p1.problem.S) == doctest::Approx(20.0).epsilon(1e-13));
  CHECK(max_eigenvalue(p1.problem.H) / min_eigenvalue(p1.problem.H) == doctest::Approx(400.0));

  const ProblemInstance p0 = make_problem(20, 0);
  CHECK(testing::max_abs_diff(p0.problem.S, SymMatrix::identity(20)) < 1e-14);
  const ProblemInstance pm = make_problem(20, -1);
  CHECK(trace(pm.problem.S) == doctest::Approx(20.0).epsilon(1e-13));
  CHECK(pm.problem.S(0, 0) > pm.problem.S(19, 19));

  for (double v : p0.theta0) CHECK(v - p0.problem.theta_star[0] == doctest::Approx(1.0));
  Theta0Spec uni;
  uni.mode = Theta0Mode::kUnitSuboptUniform;
  uni.target_subopt = 10.0;
  const ProblemInstance pu = make_problem(20, 0, uni);
  CHECK(pu.problem.objective(pu.theta0) == doctest::Approx(10.0));

  CHECK(trace(make_problem(5, 0, {}, 0.0).problem.S) == 0.0);
  CHECK_THROWS_AS(make_problem(0, 0), InvalidArgumentError);
  CHECK(theta0_mode_from_string(to_string(Theta0Mode::kOnes)) == Theta0Mode::kOnes);
}

TEST_CASE("expected suboptimality") {
  const QuadraticProblem p = scalar_problem(4.0, 0.0);
  MomentState s = initial_state(p, MethodSpec::sg(0.1), Vector{0.0});
  CHECK(expected_subopt(p, s) == 0.0);
  s.Sigma = SymMatrix::diagonal({0.5});
  CHECK(expected_subopt(p, s) == doctest::Approx(1.0));
}

TEST_CASE("moment steps") {
  const ProblemInstance inst = make_problem(6, 1);
  const QuadraticProblem& p = inst.problem;
  // one-step Newton without noise
  QuadraticProblem quiet = p;
  quiet.S = SymMatrix(6);
  const MomentState s1 = step_moments(quiet, MethodSpec::newton(quiet, 1.0),
                                      initial_state(quiet, MethodSpec::newton(quiet, 1.0), inst.theta0));
  CHECK(norm_sq(s1.delta) < 1e-28);
  CHECK(frobenius_norm(s1.Sigma) < 1e-14);

  // dense recursion by hand for a random preconditioner
  Rng rng = make_rng(1);
  SymMatrix M = testing::random_psd(6, 6, rng);
  M *= 0.1 / max_eigenvalue(M);
  M += 0.01 * SymMatrix::identity(6);
  const MethodSpec pre = MethodSpec::preconditioned(0.5, M);
  const MomentState s0 = initial_state(p, pre, inst.theta0);
  const MomentState next = step_moments(p, pre, s0);
  Matrix A = Matrix::identity(6) - 0.5 * matmul(M.matrix(), p.H.matrix());
  const Vector delta = matvec(A, s0.delta);
  const SymMatrix MSM = congruence(M.matrix(), p.S);
  SymMatrix sigma = congruence(A, s0.Sigma);
  sigma += 0.25 * MSM;
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(next.delta[i] - delta[i]) < 1e-14);
  CHECK(testing::max_abs_diff(next.Sigma, sigma) < 1e-13);

  // zero stepsize keeps the state
  const MethodSpec tiny = MethodSpec::sg(1e-300);
  const MomentState same = step_moments(p, tiny, initial_state(p, tiny, inst.theta0));
  CHECK(testing::max_abs_diff(same.Sigma, initial_state(p, tiny, inst.theta0).Sigma) < 1e-250);
}

TEST_CASE("scalar SG moments agree with Monte Carlo") {
  const QuadraticProblem p = scalar_problem(1.0, 1.0);
  const MethodSpec m = MethodSpec::sg(0.1);
  const std::int64_t steps = 30;
  const Vector exact = subopt_curve(p, m, Vector{0.0}, steps);
  const SimulationResult sim = simulate_paths(p, m, Vector{0.0}, steps, 100000, 5);
  int outliers = 0;
  for (std::size_t t = 1; t <= static_cast<std::size_t>(steps); ++t)
    outliers += std::abs(sim.mean[t] - exact[t]) > 3.0 * sim.stderr_[t];
  // about 0.3% of checks may fall outside 3 SE by chance
  CHECK(outliers <= 1);
  // closed form of the second moment: alpha^2 s (1 - a^{2t}) / (1 - a^2)
  const double a = 0.9;
  const double sigma30 = 0.01 * (1.0 - std::pow(a, 60)) / (1.0 - a * a);
  CHECK(exact[30] == doctest::Approx(0.5 * sigma30).epsilon(1e-12));
}

TEST_CASE("limit cycles") {
  CHECK(limit_cycle_sg(scalar_problem(1.0, 0.0), 0.5, SymMatrix::identity(1)) == 0.0);
  CHECK(limit_cycle_sg(scalar_problem(1.0, 1.0), 1.0, SymMatrix::identity(1)) == doctest::Approx(0.5));
  CHECK(limit_cycle_polyak(scalar_problem(1.0, 0.0), 0.1, 0.5) == 0.0);

  const ProblemInstance b0 = make_problem(20, 0);
  const MethodSpec sg = MethodSpec::sg(1e-3);
  const double closed = limit_cycle_sg(b0.problem, 1e-3, SymMatrix::identity(20));
  const MomentState fixed = stationary_by_iteration(b0.problem, sg);
  CHECK(rel(closed, expected_subopt(b0.problem, fixed)) < 1e-10);
  CHECK(lyapunov_residual(b0.problem, sg, stationary_covariance(b0.problem, sg)) < 1e-12);

  const ProblemInstance b1 = make_problem(20, 1);
  const MethodSpec pol = MethodSpec::polyak(1e-4, 0.9);
  const double pclosed = limit_cycle_polyak(b1.problem, 1e-4, 0.9);
  CHECK(rel(pclosed, expected_subopt(b1.problem, stationary_by_iteration(b1.problem, pol))) < 1e-9);
  CHECK(rel(pclosed, stationary_subopt(b1.problem, pol)) < 1e-9);

  // no momentum is plain SG
  CHECK(rel(limit_cycle_polyak(b1.problem, 1e-3, 0.0),
            limit_cycle_sg(b1.problem, 1e-3, SymMatrix::identity(20))) < 1e-12);

  // small stepsizes: momentum matches SG at alpha (1 - gamma)
  for (double alpha : {1e-5, 1e-6}) {
    for (double gamma : {0.5, 0.9}) {
      const double ratio = limit_cycle_polyak(b1.problem, alpha * (1.0 - gamma), gamma) /
                           limit_cycle_sg(b1.problem, alpha, SymMatrix::identity(20));
      CHECK(ratio >= 0.95);
      CHECK(ratio <= 1.05);
    }
  }

  CHECK_THROWS_AS(limit_cycle_sg(b0.problem, 0.01, SymMatrix::identity(20)), DivergenceError);
  CHECK_THROWS_AS(limit_cycle_polyak(b0.problem, 0.5, 0.5), DivergenceError);
  Rng rng = make_rng(2);
  const SymMatrix rot = testing::random_psd(20, 20, rng);
  CHECK_THROWS_AS(limit_cycle_sg(b0.problem, 1e-4, rot + SymMatrix::identity(20)), UnsupportedError);
}

TEST_CASE("dense Lyapunov solve on a non-diagonal problem") {
  Rng rng = make_rng(3);
  SymMatrix H = testing::random_psd(5, 5, rng);
  H += SymMatrix::identity(5);
  const QuadraticProblem p{H, Vector(5, 0.0), testing::random_psd(5, 2, rng)};
  const MethodSpec m = MethodSpec::sg(0.5 / max_eigenvalue(H));
  const SymMatrix sigma = stationary_covariance(p, m);
  CHECK(lyapunov_residual(p, m, sigma) < 1e-12);
  const MomentState it = stationary_by_iteration(p, m);
  CHECK(testing::max_abs_diff(it.Sigma, sigma) < 1e-10 * (1.0 + frobenius_norm(sigma)));
}

TEST_CASE("steps to threshold") {
  const ProblemInstance inst = make_problem(20, 0, {}, 0.0);
  const StepsOutcome newton =
      steps_to_threshold(inst.problem, MethodSpec::newton(inst.problem, 1.0), inst.theta0, 1e-6);
  CHECK(newton.reached());
  CHECK(newton.steps == 1);

  const ProblemInstance noisy = make_problem(20, 0);
  const MethodSpec big = MethodSpec::sg(4.5e-3);
  const StepsOutcome never = steps_to_threshold(noisy.problem, big, noisy.theta0, 1e-3, 5);
  CHECK(never.status == StepsOutcome::Status::kNever);
  CHECK(never.steps == 0);
  CHECK(never.limit_value > 1e-3);

  const StepsOutcome diverged = steps_to_threshold(noisy.problem, MethodSpec::sg(0.01), noisy.theta0, 1.0);
  CHECK(diverged.status == StepsOutcome::Status::kDiverged);

  // monotone in eps
  std::int64_t previous = 0;
  for (double eps : {1.0, 0.5, 0.2, 0.1}) {
    const StepsOutcome o = steps_to_threshold(noisy.problem, MethodSpec::sg(1e-3), noisy.theta0, eps);
    REQUIRE(o.reached());
    CHECK(o.steps >= previous);
    previous = o.steps;
  }
}

TEST_CASE("threshold crossing agrees with simulated paths") {
  const ProblemInstance inst = make_problem(20, 0);
  // best SG stepsize for eps = 1 on the default grid
  const StepsizeSearch best = optimize_stepsize(inst.problem, inst.theta0, Optimizer::kSG, 1.0,
                                                default_alpha_grid(), std::vector<double>{0.0});
  CHECK(round_one_digit_ok(best.best_alpha));
  const MethodSpec m = MethodSpec::sg(best.best_alpha);
  const StepsOutcome o = steps_to_threshold(inst.problem, m, inst.theta0, 1.0);
  REQUIRE(o.reached());
  const auto k = static_cast<std::size_t>(o.steps);
  const SimulationResult sim = simulate_paths(inst.problem, m, inst.theta0, o.steps, 4000, 9);
  CHECK(sim.mean[k] <= 1.0 + 3.0 * sim.stderr_[k]);
  CHECK(sim.mean[k - 1] > 1.0 - 3.0 * sim.stderr_[k - 1]);
}

TEST_CASE("stepsize grids and search") {
  const std::vector<double> g = log_grid(1e-2, 1.0, 2);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == doctest::Approx(1e-2));
  CHECK(g[1] == doctest::Approx(std::pow(10.0, -1.5)));
  CHECK(g.back() == doctest::Approx(1.0));
  const std::vector<double> def = default_alpha_grid();
  CHECK(def.front() == doctest::Approx(1e-5));
  CHECK(def.back() <= 2.0);
  CHECK(def.size() == 319);

  // |1 - 0.5| = |1 - 1.5|: equal counts, the larger stepsize wins
  const QuadraticProblem p = scalar_problem(1.0, 0.0);
  const Vector theta0{4.0};
  const std::vector<double> alphas{0.5, 1.5};
  const StepsizeSearch s = optimize_stepsize(p, theta0, Optimizer::kSG, 1e-3, alphas, std::vector<double>{0.0});
  CHECK(s.best_alpha == 1.5);
  CHECK(s.profile.size() == 2);
  CHECK(s.profile[0].outcome.steps == s.profile[1].outcome.steps);

  const std::vector<double> bad{3.0};
  CHECK_THROWS_AS(optimize_stepsize(p, theta0, Optimizer::kSG, 1e-3, bad, std::vector<double>{0.0}),
                  InfeasibleError);
}

TEST_CASE("function-value bound") {
  QuadraticProblem quiet{SymMatrix::diagonal({1.0, 3.0, 9.0}), Vector(3, 0.0), SymMatrix(3)};
  const FunctionValueBoundCheck c = check_function_value_bound(quiet, MethodSpec::sg(0.01), Vector{1.0, -1.0, 2.0}, 2000, 0, 1);
  CHECK(c.floor == 0.0);
  CHECK(c.violations == 0);
  CHECK(c.rate == doctest::Approx(1.0 - 2.0 * 0.01 * (1.0 - 0.005 * 9.0) * 1.0));

  const ProblemInstance inst = make_problem(20, 0);
  const FunctionValueBoundCheck noisy = check_function_value_bound(inst.problem, MethodSpec::sg(1e-3), inst.theta0, 10000, 0, 1);
  CHECK(noisy.violations == 0);
  CHECK(noisy.exact.size() == 10001);
  CHECK_THROWS_AS(check_function_value_bound(inst.problem, MethodSpec::polyak(1e-3, 0.5), inst.theta0, 10, 0, 1),
                  BoundInapplicableError);
  CHECK_THROWS_AS(check_function_value_bound(inst.problem, MethodSpec::sg(0.1), inst.theta0, 10, 0, 1),
                  BoundInapplicableError);
}

TEST_CASE("simulated paths") {
  const ProblemInstance inst = make_problem(5, 0, {}, 0.0);
  const MethodSpec m = MethodSpec::sg(0.01);
  const SimulationResult sim = simulate_paths(inst.problem, m, inst.theta0, 50, 10, 3);
  const Vector gd = subopt_curve(inst.problem, m, inst.theta0, 50);
  for (std::size_t t = 0; t <= 50; ++t) {
    CHECK(sim.mean[t] == doctest::Approx(gd[t]).epsilon(1e-12));
    CHECK(sim.stderr_[t] < 1e-12);
  }
  const ProblemInstance noisy = make_problem(5, 1);
  const SimulationResult a = simulate_paths(noisy.problem, m, noisy.theta0, 40, 200, 11);
  const SimulationResult b = simulate_paths(noisy.problem, m, noisy.theta0, 40, 200, 11);
  CHECK(a.mean == b.mean);
  CHECK(a.stderr_ == b.stderr_);
  const SimulationResult c = simulate_paths(noisy.problem, MethodSpec::polyak(0.005, 0.8), noisy.theta0, 40, 200, 11);
  CHECK(c.mean.size() == 41);
}
