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

#include "infolab/quadsim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "infolab/error.hpp"
#include "infolab/rng.hpp"
#include "parallel.hpp"

namespace infolab {

namespace {

constexpr double kCommuteTol = 1e-10;

Vector difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("vector dimensions differ");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

bool commute(const SymMatrix& a, const SymMatrix& b) {
  const double scale = frobenius_norm(a) * frobenius_norm(b);
  return commutator_norm(a, b) <= kCommuteTol * std::max(scale, 1e-300);
}

Matrix mean_iteration(const QuadraticProblem& p, const MethodSpec& m) {
  const std::size_t d = p.dim();
  Matrix a = Matrix::identity(d);
  const Matrix mh = matmul(m.preconditioner(d).matrix(), p.H.matrix());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) -= m.alpha * mh(i, j);
  return a;
}

/// P = [[I, -alpha I], [H, gamma I - alpha H]] on [theta - theta*; v].
Matrix polyak_transition(const QuadraticProblem& p, double alpha, double gamma) {
  const std::size_t d = p.dim();
  Matrix P(2 * d, 2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    P(i, i) = 1.0;
    P(i, d + i) = -alpha;
    for (std::size_t j = 0; j < d; ++j) {
      P(d + i, j) = p.H(i, j);
      P(d + i, d + j) = -alpha * p.H(i, j);
    }
    P(d + i, d + i) += gamma;
  }
  return P;
}

/// Jury conditions for z^2 - (1 + gamma - alpha h) z + gamma.
bool polyak_stable(double h, double alpha, double gamma) {
  return std::abs(gamma) < 1.0 && std::abs(1.0 + gamma - alpha * h) < 1.0 + gamma;
}

double polyak_block_radius(double h, double alpha, double gamma) {
  const double tr = 1.0 + gamma - alpha * h;
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * gamma));
  return std::max(std::abs((tr + disc) / 2.0), std::abs((tr - disc) / 2.0));
}

/// Eigenvalues of M H, via the symmetric M^1/2 H M^1/2.
Vector preconditioned_spectrum(const QuadraticProblem& p, const MethodSpec& m) {
  const SymMatrix M = m.preconditioner(p.dim());
  if (M.is_diagonal() && p.H.is_diagonal()) {
    Vector out(p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) out[i] = M(i, i) * p.H(i, i);
    return out;
  }
  const SymMatrix root = spectral_map(M, [](double x) { return std::sqrt(std::max(x, 0.0)); });
  return eigh(congruence(root.matrix(), p.H)).eigenvalues;
}

Vector hessian_spectrum(const QuadraticProblem& p) {
  if (p.H.is_diagonal()) return p.H.diag();
  return eigh(p.H).eigenvalues;
}

bool is_stable(const QuadraticProblem& p, const MethodSpec& m) {
  if (m.kind == MethodKind::kPolyak) {
    for (double h : hessian_spectrum(p))
      if (!polyak_stable(h, m.alpha, m.gamma)) return false;
    return true;
  }
  for (double lam : preconditioned_spectrum(p, m))
    if (!(std::abs(1.0 - m.alpha * lam) < 1.0)) return false;
  return true;
}

bool diagonal_path(const QuadraticProblem& p, const MethodSpec& m) {
  return p.is_diagonal() && (m.M.empty() || m.M.is_diagonal());
}

/// Diagonal of the second moments for diagonal problems. Off-diagonal
/// entries never feed back into the diagonal when H, S and M are diagonal.
struct DiagonalPropagator {
  std::size_t d = 0;
  bool polyak = false;
  double alpha = 0.0;
  double gamma = 0.0;
  Vector h, s, c, noise;  // SG: c = (1 - alpha m h)^2, noise = alpha^2 m^2 s
  Vector st, stv, sv;

  DiagonalPropagator(const QuadraticProblem& p, const MethodSpec& m, std::span<const double> e0)
      : d(p.dim()), polyak(m.kind == MethodKind::kPolyak), alpha(m.alpha), gamma(m.gamma) {
    h = p.H.diag();
    s = p.S.diag();
    st.resize(d);
    for (std::size_t i = 0; i < d; ++i) st[i] = e0.empty() ? 0.0 : e0[i] * e0[i];
    if (polyak) {
      stv.assign(d, 0.0);
      sv.assign(d, 0.0);
    } else {
      const Vector mdiag = m.M.empty() ? Vector(d, 1.0) : m.M.diag();
      c.resize(d);
      noise.resize(d);
      for (std::size_t i = 0; i < d; ++i) {
        const double a = 1.0 - alpha * mdiag[i] * h[i];
        c[i] = a * a;
        noise[i] = alpha * alpha * mdiag[i] * mdiag[i] * s[i];
      }
    }
  }

  double subopt() const {
    double f = 0.0;
    for (std::size_t i = 0; i < d; ++i) f += 0.5 * h[i] * st[i];
    return f;
  }

  /// Returns the largest absolute change of any tracked entry.
  double step() {
    double change = 0.0;
    if (!polyak) {
      for (std::size_t i = 0; i < d; ++i) {
        const double next = c[i] * st[i] + noise[i];
        change = std::max(change, std::abs(next - st[i]));
        st[i] = next;
      }
      return change;
    }
    for (std::size_t i = 0; i < d; ++i) {
      const double b = gamma - alpha * h[i];
      const double nst = st[i] - 2.0 * alpha * stv[i] + alpha * alpha * sv[i];
      const double nstv = h[i] * st[i] + (b - alpha * h[i]) * stv[i] - alpha * b * sv[i];
      const double nsv = h[i] * h[i] * st[i] + 2.0 * h[i] * b * stv[i] + b * b * sv[i] + s[i];
      change = std::max({change, std::abs(nst - st[i]), std::abs(nstv - stv[i]),
                         std::abs(nsv - sv[i])});
      st[i] = nst;
      stv[i] = nstv;
      sv[i] = nsv;
    }
    return change;
  }

  double scale() const {
    double m = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      m = std::max(m, std::abs(st[i]));
      if (polyak) m = std::max({m, std::abs(stv[i]), std::abs(sv[i])});
    }
    return m;
  }
};

double max_abs_change(const Matrix& a, const Matrix& b, double& scale) {
  double change = 0.0;
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t k = 0; k < x.size(); ++k) {
    change = std::max(change, std::abs(x[k] - y[k]));
    scale = std::max(scale, std::abs(y[k]));
  }
  return change;
}

}  // namespace

// ---------------------------------------------------------------------------
// Problems

void QuadraticProblem::validate() const {
  const std::size_t d = H.dim();
  if (d == 0) throw InvalidArgumentError("QuadraticProblem: empty H");
  if (S.dim() != d || theta_star.size() != d)
    throw DimensionError("QuadraticProblem: H, S and theta_star dimensions differ");
  if (!(min_eigenvalue(H) > 0.0))
    throw InvalidArgumentError("QuadraticProblem: H is not positive definite");
  if (min_eigenvalue(S) < -1e-12)
    throw InvalidArgumentError("QuadraticProblem: S is not positive semidefinite");
}

double QuadraticProblem::objective(std::span<const double> theta) const {
  const Vector e = difference(theta, theta_star);
  return 0.5 * quadform(H, e);
}

bool QuadraticProblem::is_diagonal() const { return H.is_diagonal() && S.is_diagonal(); }

const char* to_string(Theta0Mode mode) {
  switch (mode) {
    case Theta0Mode::kUnitSuboptUniform: return "unit-subopt-uniform";
    case Theta0Mode::kOnes: return "ones";
    case Theta0Mode::kExplicit: return "explicit";
  }
  return "unknown";
}

Theta0Mode theta0_mode_from_string(const std::string& name) {
  if (name == "unit-subopt-uniform") return Theta0Mode::kUnitSuboptUniform;
  if (name == "ones") return Theta0Mode::kOnes;
  if (name == "explicit") return Theta0Mode::kExplicit;
  throw InvalidArgumentError("unknown theta0 mode '" + name + "'");
}

SymMatrix noise_covariance(const SymMatrix& H, const NoiseGeometry& geometry) {
  if (!(geometry.trace_target >= 0.0))
    throw InvalidArgumentError("noise_covariance: negative trace target");
  const double beta = static_cast<double>(geometry.beta);
  SymMatrix S;
  if (H.is_diagonal()) {
    Vector diag(H.dim());
    for (std::size_t i = 0; i < diag.size(); ++i) {
      if (!(H(i, i) > 0.0)) throw InvalidArgumentError("noise_covariance: H not positive definite");
      diag[i] = std::pow(H(i, i), beta);
    }
    S = SymMatrix::diagonal(diag);
  } else {
    if (!(min_eigenvalue(H) > 0.0))
      throw InvalidArgumentError("noise_covariance: H not positive definite");
    S = spectral_map(H, [beta](double x) { return std::pow(x, beta); });
  }
  S *= geometry.trace_target / trace(S);
  return S;
}

ProblemInstance make_problem(int d, int beta, const Theta0Spec& theta0, double noise_multiplier) {
  if (d < 1) throw InvalidArgumentError("make_problem: d must be >= 1");
  if (!(noise_multiplier >= 0.0))
    throw InvalidArgumentError("make_problem: noise multiplier must be >= 0");
  const auto n = static_cast<std::size_t>(d);
  Vector h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = static_cast<double>((i + 1) * (i + 1));

  ProblemInstance out;
  out.problem.H = SymMatrix::diagonal(h);
  out.problem.theta_star.assign(n, 0.0);
  SymMatrix S = noise_covariance(out.problem.H, {beta, static_cast<double>(d)});
  double tr_h_beta = 0.0;
  for (double x : h) tr_h_beta += std::pow(x, static_cast<double>(beta));
  out.noise_scale = static_cast<double>(d) / tr_h_beta;
  if (noise_multiplier != 1.0) S *= noise_multiplier;
  out.problem.S = std::move(S);
  out.theta0_spec = theta0;

  switch (theta0.mode) {
    case Theta0Mode::kUnitSuboptUniform: {
      if (!(theta0.target_subopt > 0.0))
        throw InvalidArgumentError("make_problem: target suboptimality must be > 0");
      double tr = 0.0;
      for (double x : h) tr += x;
      out.theta0.assign(n, std::sqrt(2.0 * theta0.target_subopt / tr));
      break;
    }
    case Theta0Mode::kOnes:
      out.theta0.assign(n, 1.0);
      break;
    case Theta0Mode::kExplicit:
      if (theta0.explicit_theta.size() != n)
        throw DimensionError("make_problem: explicit theta0 has the wrong dimension");
      out.theta0 = theta0.explicit_theta;
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Methods

const char* to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::kSG: return "sg";
    case MethodKind::kPreconditioned: return "preconditioned-sg";
    case MethodKind::kPolyak: return "polyak";
  }
  return "unknown";
}

MethodSpec MethodSpec::sg(double alpha) {
  MethodSpec m;
  m.kind = MethodKind::kSG;
  m.alpha = alpha;
  return m;
}

MethodSpec MethodSpec::preconditioned(double alpha, SymMatrix M) {
  MethodSpec m;
  m.kind = MethodKind::kPreconditioned;
  m.alpha = alpha;
  m.M = std::move(M);
  return m;
}

MethodSpec MethodSpec::newton(const QuadraticProblem& p, double alpha) {
  if (p.H.is_diagonal()) {
    Vector inv = p.H.diag();
    for (double& x : inv) x = 1.0 / x;
    return preconditioned(alpha, SymMatrix::diagonal(inv));
  }
  return preconditioned(alpha, inverse_spd(p.H));
}

MethodSpec MethodSpec::polyak(double alpha, double gamma) {
  MethodSpec m;
  m.kind = MethodKind::kPolyak;
  m.alpha = alpha;
  m.gamma = gamma;
  return m;
}

SymMatrix MethodSpec::preconditioner(std::size_t dim) const {
  if (M.empty()) return SymMatrix::identity(dim);
  if (M.dim() != dim) throw DimensionError("preconditioner dimension does not match the problem");
  return M;
}

void MethodSpec::validate(std::size_t dim) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw InvalidArgumentError("method: alpha must be positive and finite");
  if (kind == MethodKind::kPolyak) {
    if (!(gamma >= 0.0 && gamma < 1.0))
      throw InvalidArgumentError("method: gamma must lie in [0, 1)");
    if (!M.empty()) throw InvalidArgumentError("method: Polyak does not take a preconditioner");
    return;
  }
  if (kind == MethodKind::kSG && !M.empty())
    throw InvalidArgumentError("method: plain SG does not take a preconditioner");
  if (kind == MethodKind::kPreconditioned) {
    if (M.empty()) throw InvalidArgumentError("method: preconditioned SG needs M");
    if (M.dim() != dim) throw DimensionError("method: M dimension does not match the problem");
    if (!(min_eigenvalue(M) > 0.0))
      throw InvalidArgumentError("method: M must be positive definite");
  }
}

// ---------------------------------------------------------------------------
// Exact moments

MomentState initial_state(const QuadraticProblem& p, const MethodSpec& m,
                          std::span<const double> theta0) {
  MomentState s;
  s.delta = difference(theta0, p.theta_star);
  s.Sigma = outer(s.delta);
  if (m.kind == MethodKind::kPolyak) {
    s.delta_v.assign(p.dim(), 0.0);
    s.Sigma_vv = SymMatrix(p.dim());
    s.Sigma_thetav = Matrix(p.dim(), p.dim());
  }
  return s;
}

MomentState step_moments(const QuadraticProblem& p, const MethodSpec& m, const MomentState& s) {
  const std::size_t d = p.dim();
  if (s.delta.size() != d || s.Sigma.dim() != d || p.S.dim() != d)
    throw DimensionError("step_moments: state dimension does not match the problem");

  MomentState next;
  next.t = s.t + 1;

  if (m.kind != MethodKind::kPolyak) {
    const Matrix A = mean_iteration(p, m);
    const SymMatrix M = m.preconditioner(d);
    next.delta = matvec(A, s.delta);
    next.Sigma = congruence(A, s.Sigma);
    next.Sigma += (m.alpha * m.alpha) * congruence(M.matrix(), p.S);
    return next;
  }

  if (!s.has_velocity() || s.Sigma_vv.dim() != d || s.Sigma_thetav.rows() != d ||
      s.Sigma_thetav.cols() != d)
    throw DimensionError("step_moments: Polyak state needs velocity blocks");
  const double a = m.alpha;
  const Matrix& H = p.H.matrix();
  Matrix B = (-a) * H;
  for (std::size_t i = 0; i < d; ++i) B(i, i) += m.gamma;

  const Matrix& ee = s.Sigma.matrix();
  const Matrix& ev = s.Sigma_thetav;
  const Matrix ve = ev.transpose();
  const Matrix& vv = s.Sigma_vv.matrix();

  // e' = e - a v,  v' = H e + B v + eps
  next.delta.resize(d);
  const Vector hd = matvec(p.H, s.delta);
  const Vector bv = matvec(B, s.delta_v);
  next.delta_v.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    next.delta[i] = s.delta[i] - a * s.delta_v[i];
    next.delta_v[i] = hd[i] + bv[i];
  }

  Matrix see = ee - a * (ev + ve) + (a * a) * vv;
  next.Sigma = SymMatrix::symmetrized(see);
  next.Sigma_thetav =
      matmul(ee, H) + matmul(ev, B) - a * matmul(ve, H) - a * matmul(vv, B);
  const Matrix cross = matmul(matmul(H, ev), B);
  Matrix svv = matmul(matmul(H, ee), H) + cross + cross.transpose() + matmul(matmul(B, vv), B);
  next.Sigma_vv = SymMatrix::symmetrized(svv);
  next.Sigma_vv += p.S;
  return next;
}

double expected_subopt(const QuadraticProblem& p, const MomentState& s) {
  return 0.5 * trace_product(p.H, s.Sigma);
}

double spectral_radius(const QuadraticProblem& p, const MethodSpec& m) {
  double r = 0.0;
  if (m.kind == MethodKind::kPolyak) {
    for (double h : hessian_spectrum(p)) r = std::max(r, polyak_block_radius(h, m.alpha, m.gamma));
    return r;
  }
  for (double lam : preconditioned_spectrum(p, m)) r = std::max(r, std::abs(1.0 - m.alpha * lam));
  return r;
}

MomentState stationary_by_iteration(const QuadraticProblem& p, const MethodSpec& m, double rel_tol,
                                    std::int64_t max_steps) {
  m.validate(p.dim());
  if (!is_stable(p, m))
    throw DivergenceError("stationary_by_iteration: the mean iteration is unstable", 0);
  const std::size_t d = p.dim();

  if (diagonal_path(p, m)) {
    DiagonalPropagator prop(p, m, {});
    for (std::int64_t t = 1; t <= max_steps; ++t) {
      const double change = prop.step();
      if (!std::isfinite(change)) throw DivergenceError("stationary_by_iteration: non-finite moments", t);
      if (change <= rel_tol * prop.scale()) {
        MomentState s;
        s.t = t;
        s.delta.assign(d, 0.0);
        s.Sigma = SymMatrix::diagonal(prop.st);
        if (prop.polyak) {
          s.delta_v.assign(d, 0.0);
          s.Sigma_vv = SymMatrix::diagonal(prop.sv);
          s.Sigma_thetav = Matrix(d, d);
          for (std::size_t i = 0; i < d; ++i) s.Sigma_thetav(i, i) = prop.stv[i];
        }
        return s;
      }
    }
    throw NumericalError("stationary_by_iteration: no convergence within the step budget");
  }

  MomentState s = initial_state(p, m, p.theta_star);
  for (std::int64_t t = 1; t <= max_steps; ++t) {
    MomentState next = step_moments(p, m, s);
    double scale = 0.0;
    double change = max_abs_change(s.Sigma.matrix(), next.Sigma.matrix(), scale);
    if (next.has_velocity()) {
      change = std::max(change, max_abs_change(s.Sigma_vv.matrix(), next.Sigma_vv.matrix(), scale));
      change = std::max(change, max_abs_change(s.Sigma_thetav, next.Sigma_thetav, scale));
    }
    s = std::move(next);
    if (!std::isfinite(change)) throw DivergenceError("stationary_by_iteration: non-finite moments", t);
    if (change <= rel_tol * scale) return s;
  }
  throw NumericalError("stationary_by_iteration: no convergence within the step budget");
}

SymMatrix stationary_covariance(const QuadraticProblem& p, const MethodSpec& m) {
  m.validate(p.dim());
  if (!is_stable(p, m))
    throw DivergenceError("stationary_covariance: the mean iteration is unstable", 0);
  const std::size_t d = p.dim();

  Matrix A;
  Matrix X;
  if (m.kind == MethodKind::kPolyak) {
    A = polyak_transition(p, m.alpha, m.gamma);
    X = Matrix(2 * d, 2 * d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) X(d + i, d + j) = p.S(i, j);
  } else {
    A = mean_iteration(p, m);
    const SymMatrix M = m.preconditioner(d);
    X = (m.alpha * m.alpha) * congruence(M.matrix(), p.S).matrix();
  }

  // Smith doubling: X_{k+1} = X_k + A_k X_k A_k^T, A_{k+1} = A_k^2.
  for (int iter = 0; iter < 200; ++iter) {
    const Matrix inc = matmul(matmul(A, X), A.transpose());
    double scale = 0.0;
    double inc_max = 0.0;
    for (double v : inc.data()) inc_max = std::max(inc_max, std::abs(v));
    X += inc;
    for (double v : X.data()) scale = std::max(scale, std::abs(v));
    if (!std::isfinite(scale)) throw DivergenceError("stationary_covariance: non-finite values", 0);
    if (inc_max <= 1e-17 * scale) break;
    A = matmul(A, A);
  }

  Matrix top(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) top(i, j) = X(i, j);
  return SymMatrix::symmetrized(top);
}

double lyapunov_residual(const QuadraticProblem& p, const MethodSpec& m, const SymMatrix& sigma) {
  const std::size_t d = p.dim();
  const Matrix M = m.preconditioner(d).matrix();
  const Matrix& H = p.H.matrix();
  const Matrix& X = sigma.matrix();
  const Matrix lhs = matmul(matmul(X, H), M) + matmul(matmul(M, H), X);
  const Matrix inner = p.S.matrix() + matmul(matmul(H, X), H);
  const Matrix rhs = m.alpha * matmul(matmul(M, inner), M);
  return std::sqrt(frobenius_dist_sq(lhs, rhs));
}

double limit_cycle_sg(const QuadraticProblem& p, double alpha, const SymMatrix& M) {
  const std::size_t d = p.dim();
  if (M.dim() != d || p.S.dim() != d) throw DimensionError("limit_cycle_sg: dimension mismatch");
  if (!commute(p.H, p.S) || !commute(p.H, M) || !commute(p.S, M))
    throw UnsupportedError("limit_cycle_sg: H, S and M are not simultaneously diagonalizable");
  const SymMatrix K = SymMatrix::symmetrized(matmul(M.matrix(), p.H.matrix()));
  const SymMatrix MS = SymMatrix::symmetrized(matmul(M.matrix(), p.S.matrix()));
  const EigenDecomp e = K.is_diagonal() ? EigenDecomp{} : eigh(K);
  const Vector lams = K.is_diagonal() ? K.diag() : e.eigenvalues;
  for (double lam : lams)
    if (!(std::abs(1.0 - alpha * lam) < 1.0))
      throw DivergenceError("limit_cycle_sg: |1 - alpha lambda(MH)| >= 1", 0);

  double tr = 0.0;
  if (K.is_diagonal() && MS.is_diagonal()) {
    for (std::size_t i = 0; i < d; ++i) tr += MS(i, i) / (2.0 - alpha * K(i, i));
  } else {
    const EigenDecomp ek = K.is_diagonal() ? eigh(K) : e;
    tr = trace_product(spectral_map(ek, [alpha](double x) { return 1.0 / (2.0 - alpha * x); }), MS);
  }
  return 0.5 * alpha * tr;
}

double limit_cycle_polyak(const QuadraticProblem& p, double alpha, double gamma) {
  const std::size_t d = p.dim();
  if (p.S.dim() != d) throw DimensionError("limit_cycle_polyak: dimension mismatch");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw InvalidArgumentError("limit_cycle_polyak: gamma must lie in [0, 1)");
  if (!commute(p.H, p.S))
    throw UnsupportedError("limit_cycle_polyak: H and S are not simultaneously diagonalizable");
  for (double h : hessian_spectrum(p))
    if (!polyak_stable(h, alpha, gamma))
      throw DivergenceError("limit_cycle_polyak: momentum iteration is unstable", 0);

  const double denom0 = 2.0 * (1.0 + gamma);
  double tr = 0.0;
  if (p.is_diagonal()) {
    for (std::size_t i = 0; i < d; ++i) tr += p.S(i, i) / (denom0 - alpha * p.H(i, i));
  } else {
    tr = trace_product(
        spectral_map(p.H, [alpha, denom0](double x) { return 1.0 / (denom0 - alpha * x); }), p.S);
  }
  return 0.5 * alpha * (1.0 + gamma) / (1.0 - gamma) * tr;
}

double stationary_subopt(const QuadraticProblem& p, const MethodSpec& m) {
  m.validate(p.dim());
  const SymMatrix M = m.preconditioner(p.dim());
  if (m.kind == MethodKind::kPolyak) {
    if (commute(p.H, p.S)) return limit_cycle_polyak(p, m.alpha, m.gamma);
  } else if (commute(p.H, p.S) && commute(p.H, M) && commute(p.S, M)) {
    return limit_cycle_sg(p, m.alpha, M);
  }
  return 0.5 * trace_product(p.H, stationary_covariance(p, m));
}

// ---------------------------------------------------------------------------
// Step counts

std::string StepsOutcome::to_string() const {
  switch (status) {
    case Status::kReached: return std::to_string(steps);
    case Status::kNever: return "never";
    case Status::kDiverged: return "diverged";
  }
  return "unknown";
}

StepsOutcome steps_to_threshold(const QuadraticProblem& p, const MethodSpec& m,
                                std::span<const double> theta0, double eps,
                                std::int64_t max_steps) {
  if (!(eps > 0.0)) throw InvalidArgumentError("steps_to_threshold: eps must be > 0");
  m.validate(p.dim());
  StepsOutcome out;
  if (!is_stable(p, m)) {
    out.status = StepsOutcome::Status::kDiverged;
    out.limit_value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.limit_value = stationary_subopt(p, m);
  if (out.limit_value > eps) {
    out.status = StepsOutcome::Status::kNever;
    return out;
  }

  if (diagonal_path(p, m)) {
    const Vector e0 = difference(theta0, p.theta_star);
    DiagonalPropagator prop(p, m, e0);
    for (std::int64_t t = 0; t <= max_steps; ++t) {
      if (prop.subopt() <= eps) {
        out.status = StepsOutcome::Status::kReached;
        out.steps = t;
        return out;
      }
      prop.step();
    }
  } else {
    MomentState s = initial_state(p, m, theta0);
    for (std::int64_t t = 0; t <= max_steps; ++t) {
      if (expected_subopt(p, s) <= eps) {
        out.status = StepsOutcome::Status::kReached;
        out.steps = t;
        return out;
      }
      s = step_moments(p, m, s);
    }
  }
  out.status = StepsOutcome::Status::kNever;
  out.steps = max_steps;
  return out;
}

Vector subopt_curve(const QuadraticProblem& p, const MethodSpec& m, std::span<const double> theta0,
                    std::int64_t steps) {
  if (steps < 0) throw InvalidArgumentError("subopt_curve: steps must be >= 0");
  Vector out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  if (diagonal_path(p, m)) {
    DiagonalPropagator prop(p, m, difference(theta0, p.theta_star));
    out.push_back(prop.subopt());
    for (std::int64_t t = 0; t < steps; ++t) {
      prop.step();
      out.push_back(prop.subopt());
    }
    return out;
  }
  MomentState s = initial_state(p, m, theta0);
  out.push_back(expected_subopt(p, s));
  for (std::int64_t t = 0; t < steps; ++t) {
    s = step_moments(p, m, s);
    out.push_back(expected_subopt(p, s));
  }
  return out;
}

const char* to_string(Optimizer o) {
  switch (o) {
    case Optimizer::kSG: return "sg";
    case Optimizer::kNewton: return "newton";
    case Optimizer::kPolyak: return "polyak";
  }
  return "unknown";
}

Optimizer optimizer_from_string(const std::string& name) {
  if (name == "sg") return Optimizer::kSG;
  if (name == "newton") return Optimizer::kNewton;
  if (name == "polyak") return Optimizer::kPolyak;
  throw InvalidArgumentError("unknown optimizer '" + name + "'");
}

MethodSpec make_method(const QuadraticProblem& p, Optimizer o, double alpha, double gamma) {
  switch (o) {
    case Optimizer::kSG: return MethodSpec::sg(alpha);
    case Optimizer::kNewton: return MethodSpec::newton(p, alpha);
    case Optimizer::kPolyak: return MethodSpec::polyak(alpha, gamma);
  }
  throw InvalidArgumentError("make_method: unknown optimizer");
}

std::vector<double> log_grid(double lo, double hi, int points_per_decade) {
  if (!(lo > 0.0) || !(hi >= lo) || points_per_decade < 1)
    throw InvalidArgumentError("log_grid: need 0 < lo <= hi and points_per_decade >= 1");
  const double ppd = points_per_decade;
  const auto kmin = static_cast<long>(std::ceil(ppd * std::log10(lo) - 1e-9));
  const auto kmax = static_cast<long>(std::floor(ppd * std::log10(hi) + 1e-9));
  std::vector<double> grid;
  for (long k = kmin; k <= kmax; ++k) grid.push_back(std::pow(10.0, static_cast<double>(k) / ppd));
  return grid;
}

std::vector<double> default_alpha_grid() { return log_grid(1e-5, 2.0, 60); }

std::vector<double> default_gamma_grid() { return {0.5, 0.8, 0.9, 0.95, 0.99}; }

StepsizeSearch optimize_stepsize(const QuadraticProblem& p, std::span<const double> theta0,
                                 Optimizer o, double eps, std::span<const double> alpha_grid,
                                 std::span<const double> gamma_grid) {
  if (alpha_grid.empty()) throw InvalidArgumentError("optimize_stepsize: empty alpha grid");
  const bool polyak = o == Optimizer::kPolyak;
  if (polyak && gamma_grid.empty())
    throw InvalidArgumentError("optimize_stepsize: empty gamma grid");
  const std::size_t ng = polyak ? gamma_grid.size() : 1;

  StepsizeSearch out;
  out.profile.resize(alpha_grid.size() * ng);
  const MethodSpec newton_template = o == Optimizer::kNewton ? MethodSpec::newton(p, 1.0) : MethodSpec{};
  detail::parallel_for(out.profile.size(), [&](std::size_t k) {
    GridPoint& g = out.profile[k];
    g.alpha = alpha_grid[k / ng];
    g.gamma = polyak ? gamma_grid[k % ng] : 0.0;
    MethodSpec m = o == Optimizer::kNewton ? newton_template : make_method(p, o, g.alpha, g.gamma);
    m.alpha = g.alpha;
    g.outcome = steps_to_threshold(p, m, theta0, eps);
  });

  bool found = false;
  for (const GridPoint& g : out.profile) {
    if (!g.outcome.reached()) continue;
    const bool better =
        !found || g.outcome.steps < out.best_steps ||
        (g.outcome.steps == out.best_steps &&
         (g.alpha > out.best_alpha || (g.alpha == out.best_alpha && g.gamma > out.best_gamma)));
    if (better) {
      found = true;
      out.best_alpha = g.alpha;
      out.best_gamma = g.gamma;
      out.best_steps = g.outcome.steps;
    }
  }
  if (!found) {
    std::ostringstream msg;
    msg << "optimize_stepsize: no stepsize on the grid reaches eps = " << eps << " for "
        << to_string(o);
    throw InfeasibleError(msg.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo

SimulationResult simulate_paths(const QuadraticProblem& p, const MethodSpec& m,
                                std::span<const double> theta0, std::int64_t steps,
                                std::size_t paths, std::uint64_t seed) {
  if (steps < 0) throw InvalidArgumentError("simulate_paths: steps must be >= 0");
  if (paths == 0) throw InvalidArgumentError("simulate_paths: paths must be >= 1");
  const std::size_t d = p.dim();
  const Vector e0 = difference(theta0, p.theta_star);
  const GaussianSampler noise(p.S);
  const bool polyak = m.kind == MethodKind::kPolyak;
  const SymMatrix M = m.preconditioner(d);
  const auto len = static_cast<std::size_t>(steps) + 1;

  constexpr std::size_t kPathBlock = 64;
  const std::size_t blocks = (paths + kPathBlock - 1) / kPathBlock;
  // Welford running moments per block, merged pairwise (Chan et al.) so that
  // identical paths give an exactly zero spread.
  struct Moments {
    double count = 0.0;
    Vector mean, m2;
  };
  std::vector<Moments> part(blocks);

  detail::parallel_for(blocks, [&](std::size_t b) {
    Moments acc{0.0, Vector(len, 0.0), Vector(len, 0.0)};
    const std::size_t end = std::min(paths, (b + 1) * kPathBlock);
    for (std::size_t k = b * kPathBlock; k < end; ++k) {
      Rng rng = make_rng(derive_seed(seed, k));
      Vector e = e0;
      Vector v(d, 0.0);
      acc.count += 1.0;
      for (std::size_t t = 0; t < len; ++t) {
        const double f = 0.5 * quadform(p.H, e);
        if (!std::isfinite(f))
          throw DivergenceError("simulate_paths: non-finite iterate", static_cast<std::int64_t>(t));
        const double delta = f - acc.mean[t];
        acc.mean[t] += delta / acc.count;
        acc.m2[t] += delta * (f - acc.mean[t]);
        if (t + 1 == len) break;
        const Vector z = noise(rng);
        if (polyak) {
          for (std::size_t i = 0; i < d; ++i) e[i] -= m.alpha * v[i];
          const Vector he = matvec(p.H, e);
          for (std::size_t i = 0; i < d; ++i) v[i] = m.gamma * v[i] + he[i] + z[i];
        } else {
          Vector g = matvec(p.H, e);
          for (std::size_t i = 0; i < d; ++i) g[i] += z[i];
          const Vector mg = matvec(M, g);
          for (std::size_t i = 0; i < d; ++i) e[i] -= m.alpha * mg[i];
        }
      }
    }
    part[b] = std::move(acc);
  });

  for (std::size_t stride = 1; stride < blocks; stride *= 2)
    for (std::size_t b = 0; b + stride < blocks; b += 2 * stride) {
      Moments& a = part[b];
      const Moments& o = part[b + stride];
      const double total = a.count + o.count;
      for (std::size_t t = 0; t < len; ++t) {
        const double delta = o.mean[t] - a.mean[t];
        a.mean[t] += delta * o.count / total;
        a.m2[t] += o.m2[t] + delta * delta * a.count * o.count / total;
      }
      a.count = total;
    }

  SimulationResult out;
  out.paths = paths;
  out.mean = part[0].mean;
  out.stderr_.assign(len, 0.0);
  const double n = static_cast<double>(paths);
  if (paths > 1)
    for (std::size_t t = 0; t < len; ++t) out.stderr_[t] = std::sqrt(part[0].m2[t] / (n - 1.0) / n);
  return out;
}

// ---------------------------------------------------------------------------
// Function-value bound

FunctionValueBoundCheck check_function_value_bound(const QuadraticProblem& p, const MethodSpec& m,
                             std::span<const double> theta0, std::int64_t horizon,
                             std::size_t mc_paths, std::uint64_t seed, int checkpoints) {
  if (m.kind == MethodKind::kPolyak)
    throw BoundInapplicableError("function-value bound covers preconditioned SG only");
  if (horizon < 0) throw InvalidArgumentError("check_function_value_bound: horizon must be >= 0");
  m.validate(p.dim());
  const SymMatrix M = m.preconditioner(p.dim());

  FunctionValueBoundCheck out;
  out.mu = min_eigenvalue(p.H);
  const SymMatrix MHM = congruence(M.matrix(), p.H);
  out.mu_M = min_eigenvalue(M - (0.5 * m.alpha) * MHM);
  if (!(out.mu_M > 0.0))
    throw BoundInapplicableError("function-value bound needs lambda_min(M - alpha/2 M H M) > 0");
  if (m.alpha * out.mu_M * out.mu > 0.5)
    throw BoundInapplicableError("function-value bound needs alpha mu_M mu <= 1/2");
  out.rate = 1.0 - 2.0 * m.alpha * out.mu_M * out.mu;
  const SymMatrix MSM = congruence(M.matrix(), p.S);
  out.floor = m.alpha / (4.0 * out.mu_M * out.mu) * trace_product(p.H, MSM);

  out.exact = subopt_curve(p, m, theta0, horizon);
  out.bound.resize(out.exact.size());
  const double delta0 = out.exact.front();
  double pow_k = 1.0;
  out.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < out.exact.size(); ++k) {
    out.bound[k] = pow_k * delta0 + out.floor;
    const double excess = out.exact[k] - out.bound[k];
    out.max_excess = std::max(out.max_excess, excess);
    if (excess > 1e-12 * (1.0 + std::abs(out.bound[k]))) ++out.violations;
    pow_k *= out.rate;
  }

  if (mc_paths > 0 && checkpoints > 0) {
    const SimulationResult sim = simulate_paths(p, m, theta0, horizon, mc_paths, seed);
    for (int c = 1; c <= checkpoints; ++c) {
      const auto k = static_cast<std::int64_t>(std::llround(static_cast<double>(horizon) * c / checkpoints));
      if (!out.checkpoints.empty() && out.checkpoints.back() == k) continue;
      const auto ku = static_cast<std::size_t>(k);
      out.checkpoints.push_back(k);
      out.mc_mean.push_back(sim.mean[ku]);
      out.mc_stderr.push_back(sim.stderr_[ku]);
      if (std::abs(sim.mean[ku] - out.exact[ku]) > 3.0 * sim.stderr_[ku] + 1e-12 * (1.0 + out.exact[ku]))
        ++out.mc_outliers;
    }
  }
  return out;
}

}  // namespace infolab
